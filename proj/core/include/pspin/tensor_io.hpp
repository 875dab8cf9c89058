#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "pspin/tensor.hpp"

namespace pspin {

void to_json(nlohmann::json& j, const Provenance& p);
void from_json(const nlohmann::json& j, Provenance& p);

/// Two-part container: a 4-byte little-endian header length, a JSON header
/// {order, dim, is_symmetric, provenance}, then N^p little-endian float64
/// entries in lexicographic order.
void write_tensor(const std::filesystem::path& path, const CouplingTensor& a);
CouplingTensor read_tensor(const std::filesystem::path& path);

/// Header only; regenerating from provenance is the preferred persistence.
nlohmann::json tensor_header(const CouplingTensor& a);

/// Rebuilds a Gaussian tensor from a header whose provenance kind is
/// "gaussian". Throws InvalidArgument for any other provenance.
CouplingTensor regenerate(const nlohmann::json& header);

}  // namespace pspin
