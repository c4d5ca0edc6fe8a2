#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "cpdcond/tensor.hpp"

namespace cpdcond {

/// File system failure (cannot open, short read, failed rename).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Well-formed file whose content does not describe a valid object.
struct FormatError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Tensor JSON: {"dims": [n1, ..., nd], "values": [...]} with row-major values.
nlohmann::json tensor_to_json(const DenseTensor& t);
DenseTensor tensor_from_json(const nlohmann::json& j);

// Tensor binary: little-endian uint64 d, d x uint64 dims, then Pi x float64 values.
void write_tensor_binary(std::ostream& os, const DenseTensor& t);
DenseTensor read_tensor_binary(std::istream& is);

// CPD JSON: {"dims": [...], "terms": [{"scale": s, "factors": [[...], ...]}, ...]}.
// Factors need not be normalized on input; they pass through Rank1Term::from_vectors
// unless already unit within tolerance.
nlohmann::json cpd_to_json(const CPDecomposition& cpd);
CPDecomposition cpd_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan" otherwise.
std::string format_double(double v);

}  // namespace cpdcond
