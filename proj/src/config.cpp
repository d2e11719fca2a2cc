#include "deltacharger/config.hpp"

#include <algorithm>

#include <json.hpp>

#include "deltacharger/dataio.hpp"
#include "deltacharger/error.hpp"

namespace deltacharger {

using nlohmann::ordered_json;

namespace {

// Copies j[key] into field when present; rejects keys the struct does not know.
class Reader {
public:
    Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw Error(ErrorKind::InvalidArgument, "config section '" + path_ + "' must be an object");
    }

    template <typename T>
    Reader& get(const char* key, T& field) {
        known_.push_back(key);
        if (j_.contains(key)) {
            try {
                field = j_.at(key).get<T>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::InvalidArgument, "config '" + path_ + "." + key + "': " + e.what());
            }
        }
        return *this;
    }

    Reader section(const char* key) {
        known_.push_back(key);
        static const nlohmann::json empty = nlohmann::json::object();
        return Reader(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (std::find(known_.begin(), known_.end(), k) == known_.end())
                throw Error(ErrorKind::InvalidArgument, "unknown config key '" + path_ + "." + k + "'");
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::vector<std::string> known_;
};

}  // namespace

std::string GlobalConfig::to_json() const {
    const auto& g = geometry;
    const auto& plan = generation.plan;
    const auto& cm = dock.current;
    ordered_json j;
    j["geometry"] = {{"base_radius", g.base_radius},
                     {"effector_radius", g.effector_radius},
                     {"upper_arm", g.upper_arm},
                     {"forearm", g.forearm},
                     {"z_home", g.z_home},
                     {"joint_limit_deg", g.joint_limit_deg},
                     {"limb_azimuths_deg", g.limb_azimuths_deg}};
    j["electrodes"] = {{"electrode_width", plan.electrode_width},
                       {"electrode_height", plan.electrode_height},
                       {"electrode_center_x", plan.electrode_center_x},
                       {"bar_length", plan.bar_length},
                       {"bar_height", plan.bar_height},
                       {"bar_center_y", plan.bar_center_y},
                       {"sensor_side", plan.sensor_side},
                       {"contact_envelope_mm", plan.contact_envelope_mm},
                       {"nominal_pressure_n", plan.nominal_pressure_n},
                       {"nominal_penetration_mm", plan.nominal_penetration_mm},
                       {"penetration_gain", plan.penetration_gain},
                       {"rate_hz", plan.rate_hz}};
    j["noise"] = {{"cell_sigma", plan.noise.cell_sigma},
                  {"dropout", plan.noise.dropout},
                  {"gain_sigma", plan.noise.gain_sigma},
                  {"floor_n", plan.noise.floor_n},
                  {"max_n", plan.noise.max_n}};
    j["generation"] = {{"angle_per_class", generation.angle_per_class},
                       {"capture_ratio", generation.capture_ratio},
                       {"initial_offset_max", generation.initial_offset_max},
                       {"initial_offset_step", generation.initial_offset_step},
                       {"position_per_cell", generation.position_per_cell},
                       {"position_step", generation.position_step},
                       {"position_jitter", generation.position_jitter}};
    j["current"] = {{"free_current", cm.free_current},
                    {"slope", cm.slope},
                    {"hold_low", cm.hold_low},
                    {"overheat", cm.overheat}};
    j["dock"] = {{"press_mm", dock.press_mm},
                 {"backoff_mm", dock.backoff_mm},
                 {"step_mm", dock.step_mm},
                 {"max_backoffs", dock.max_backoffs},
                 {"max_align_loops", dock.max_align_loops},
                 {"z_max", dock.z_max},
                 {"min_posterior", dock.min_posterior},
                 {"vision_error_max", dock.vision_error_max}};
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"learning_rate", train.learning_rate},
                  {"momentum", train.momentum},
                  {"plateau_factor", train.plateau_factor},
                  {"plateau_patience", train.plateau_patience},
                  {"train_fraction", train.train_fraction},
                  {"seed", train.seed}};
    j["paths"] = {{"data_dir", data_dir}, {"model_dir", model_dir}};
    return j.dump(2);
}

GlobalConfig GlobalConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
    }
    GlobalConfig c;
    Reader root(j, "config");
    auto& g = c.geometry;
    root.section("geometry")
        .get("base_radius", g.base_radius)
        .get("effector_radius", g.effector_radius)
        .get("upper_arm", g.upper_arm)
        .get("forearm", g.forearm)
        .get("z_home", g.z_home)
        .get("joint_limit_deg", g.joint_limit_deg)
        .get("limb_azimuths_deg", g.limb_azimuths_deg)
        .finish();
    auto& p = c.generation.plan;
    root.section("electrodes")
        .get("electrode_width", p.electrode_width)
        .get("electrode_height", p.electrode_height)
        .get("electrode_center_x", p.electrode_center_x)
        .get("bar_length", p.bar_length)
        .get("bar_height", p.bar_height)
        .get("bar_center_y", p.bar_center_y)
        .get("sensor_side", p.sensor_side)
        .get("contact_envelope_mm", p.contact_envelope_mm)
        .get("nominal_pressure_n", p.nominal_pressure_n)
        .get("nominal_penetration_mm", p.nominal_penetration_mm)
        .get("penetration_gain", p.penetration_gain)
        .get("rate_hz", p.rate_hz)
        .finish();
    root.section("noise")
        .get("cell_sigma", p.noise.cell_sigma)
        .get("dropout", p.noise.dropout)
        .get("gain_sigma", p.noise.gain_sigma)
        .get("floor_n", p.noise.floor_n)
        .get("max_n", p.noise.max_n)
        .finish();
    auto& gen = c.generation;
    root.section("generation")
        .get("angle_per_class", gen.angle_per_class)
        .get("capture_ratio", gen.capture_ratio)
        .get("initial_offset_max", gen.initial_offset_max)
        .get("initial_offset_step", gen.initial_offset_step)
        .get("position_per_cell", gen.position_per_cell)
        .get("position_step", gen.position_step)
        .get("position_jitter", gen.position_jitter)
        .finish();
    auto& cm = c.dock.current;
    root.section("current")
        .get("free_current", cm.free_current)
        .get("slope", cm.slope)
        .get("hold_low", cm.hold_low)
        .get("overheat", cm.overheat)
        .finish();
    auto& d = c.dock;
    root.section("dock")
        .get("press_mm", d.press_mm)
        .get("backoff_mm", d.backoff_mm)
        .get("step_mm", d.step_mm)
        .get("max_backoffs", d.max_backoffs)
        .get("max_align_loops", d.max_align_loops)
        .get("z_max", d.z_max)
        .get("min_posterior", d.min_posterior)
        .get("vision_error_max", d.vision_error_max)
        .finish();
    auto& t = c.train;
    root.section("train")
        .get("epochs", t.epochs)
        .get("batch_size", t.batch_size)
        .get("learning_rate", t.learning_rate)
        .get("momentum", t.momentum)
        .get("plateau_factor", t.plateau_factor)
        .get("plateau_patience", t.plateau_patience)
        .get("train_fraction", t.train_fraction)
        .get("seed", t.seed)
        .finish();
    root.section("paths").get("data_dir", c.data_dir).get("model_dir", c.model_dir).finish();
    root.finish();
    c.validate();
    return c;
}

GlobalConfig GlobalConfig::load(const std::filesystem::path& path) { return from_json(dataio::read_file(path)); }

void GlobalConfig::validate() const {
    geometry.validate();
    generation.plan.validate();
    dock.validate();
    train.validate();
    if (generation.angle_per_class < 2 || generation.position_per_cell < 1 || generation.capture_ratio < 0 ||
        generation.initial_offset_step <= 0 || generation.position_jitter < 0)
        throw Error(ErrorKind::InvalidArgument, "invalid generation parameters");
}

}  // namespace deltacharger
