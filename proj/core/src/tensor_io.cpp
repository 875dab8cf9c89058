#include "pspin/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "pspin/error.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor files are written in host order; big-endian hosts need byte swaps");

}  // namespace

void to_json(nlohmann::json& j, const Provenance& p) {
  j = nlohmann::json{{"kind", p.kind},
                     {"seed", p.seed},
                     {"generator_id", p.generator_id},
                     {"variance", p.variance}};
  if (p.seed_hat) j["seed_hat"] = *p.seed_hat;
  if (p.tau) j["tau"] = *p.tau;
}

void from_json(const nlohmann::json& j, Provenance& p) {
  p.kind = j.value("kind", std::string{});
  p.seed = j.value("seed", std::uint64_t{0});
  p.generator_id = j.value("generator_id", std::string{});
  p.variance = j.value("variance", 0.0);
  p.seed_hat = j.contains("seed_hat") ? std::optional(j.at("seed_hat").get<std::uint64_t>())
                                      : std::nullopt;
  p.tau = j.contains("tau") ? std::optional(j.at("tau").get<double>()) : std::nullopt;
}

nlohmann::json tensor_header(const CouplingTensor& a) {
  nlohmann::json h{{"order", a.order()},
                   {"dim", a.dim()},
                   {"is_symmetric", a.is_symmetric()}};
  h["provenance"] = a.provenance() ? nlohmann::json(*a.provenance()) : nlohmann::json(nullptr);
  return h;
}

void write_tensor(const std::filesystem::path& path, const CouplingTensor& a) {
  const std::string header = tensor_header(a).dump();
  const auto len = static_cast<std::uint32_t>(header.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  std::array<char, 4> prefix{};
  for (int k = 0; k < 4; ++k) prefix[static_cast<std::size_t>(k)] = static_cast<char>((len >> (8 * k)) & 0xFFu);
  out.write(prefix.data(), 4);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto e = a.entries();
  out.write(reinterpret_cast<const char*>(e.data()),
            static_cast<std::streamsize>(e.size() * sizeof(double)));
  if (!out) throw Error("failed writing " + path.string());
}

CouplingTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<unsigned char, 4> prefix{};
  in.read(reinterpret_cast<char*>(prefix.data()), 4);
  if (!in) throw InvalidArgument("truncated tensor file: missing header length");
  std::uint32_t len = 0;
  for (int k = 0; k < 4; ++k) len |= static_cast<std::uint32_t>(prefix[static_cast<std::size_t>(k)]) << (8 * k);
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw InvalidArgument("truncated tensor file: short header");
  const auto h = nlohmann::json::parse(header);
  const int order = h.at("order").get<int>();
  const int dim = h.at("dim").get<int>();
  const auto count = checked_entry_count(order, dim);
  std::vector<double> entries(count);
  in.read(reinterpret_cast<char*>(entries.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw InvalidArgument("truncated tensor file: short entry array");
  std::optional<Provenance> prov;
  if (h.contains("provenance") && !h.at("provenance").is_null()) {
    prov = h.at("provenance").get<Provenance>();
  }
  return CouplingTensor(order, dim, std::move(entries), h.at("is_symmetric").get<bool>(),
                        std::move(prov));
}

CouplingTensor regenerate(const nlohmann::json& header) {
  const auto prov = header.at("provenance").get<Provenance>();
  if (prov.kind != "gaussian" || prov.generator_id != kGeneratorId) {
    throw InvalidArgument("only gaussian tensors from generator '" +
                          std::string(kGeneratorId) + "' can be regenerated");
  }
  return sample_gaussian(header.at("order").get<int>(), header.at("dim").get<int>(), prov.seed);
}

}  // namespace pspin
