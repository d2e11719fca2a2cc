#pragma once

// DTAC v1 datasets, their JSON manifests, and DMOD v1 model files.
//
// DTAC v1:  dtac,1,<task>,<count>,<seed>
//           phi_deg,dx_mm,dy_mm,label,f0,...,f199      (count rows, 6 decimals)
// DMOD v1:  dmod,1 / task / model / classes / spec / config / blocks,<n>
//           block,<name>,<rows>,<cols> followed by one line of row-major values
//           end

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "deltacharger/dataset.hpp"
#include "deltacharger/model.hpp"

namespace deltacharger::dataio {

/// FNV-1a 64-bit, as 16 lowercase hex digits.
std::string checksum(std::string_view bytes);

std::string format_dataset(const LabeledDataset& data);
/// Throws MalformedFile with "<source>:<line>:" diagnostics.
LabeledDataset parse_dataset(std::string_view text, const std::string& source = "<memory>");

struct DatasetManifest {
    std::string format = "dtac";
    int version = 1;
    DatasetKind kind = DatasetKind::Angle;
    std::size_t count = 0;
    std::string protocol;
    std::uint64_t seed = 0;
    double train_fraction = 0.67;
    std::string checksum;

    std::string to_json() const;
    static DatasetManifest from_json(std::string_view text, const std::string& source = "<memory>");
};

std::string protocol_of(DatasetKind kind);
DatasetManifest make_manifest(const LabeledDataset& data, std::string_view file_bytes, double train_fraction = 0.67);
std::filesystem::path manifest_path(const std::filesystem::path& dataset);

/// Writes the dataset and `<path>.manifest.json`. Throws Io.
DatasetManifest write_dataset(const LabeledDataset& data, const std::filesystem::path& path,
                              double train_fraction = 0.67);
/// Reads a dataset; when a manifest sits next to it, its count and checksum must match.
LabeledDataset read_dataset(const std::filesystem::path& path);

std::string format_model(const ModelArtifact& model);
ModelArtifact parse_model(std::string_view text, const std::string& source = "<memory>");
void write_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact read_model(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace deltacharger::dataio
