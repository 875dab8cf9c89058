#include "pspin/records_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pspin/error.hpp"
#include "pspin/tensor_io.hpp"

namespace pspin {

using nlohmann::json;

void to_json(json& j, const RunMetadata& m) {
  j = json{{"master_seed", m.master_seed},     {"generator_id", m.generator_id},
           {"build_version", m.build_version}, {"timestamp", m.timestamp},
           {"config_digest", m.config_digest}};
}

void from_json(const json& j, RunMetadata& m) {
  j.at("master_seed").get_to(m.master_seed);
  j.at("generator_id").get_to(m.generator_id);
  j.at("build_version").get_to(m.build_version);
  j.at("timestamp").get_to(m.timestamp);
  j.at("config_digest").get_to(m.config_digest);
}

void to_json(json& j, const ScheduleConfig& c) {
  j = json{{"schedule", c.schedule},
           {"beta", c.beta},
           {"q", c.q},
           {"a", c.a},
           {"eta", c.eta},
           {"direction", to_string(c.direction)},
           {"T", c.T},
           {"M", c.M},
           {"data_driven_a", c.data_driven_a},
           {"init", to_string(c.init)}};
}

// Missing keys keep their defaults so configs can be partial.
void from_json(const json& j, ScheduleConfig& c) {
  if (!j.is_object()) throw InvalidArgument("schedule config must be a JSON object");
  c.schedule = j.value("schedule", c.schedule);
  c.beta = j.value("beta", c.beta);
  c.q = j.value("q", c.q);
  c.a = j.value("a", c.a);
  c.eta = j.value("eta", c.eta);
  if (j.contains("direction")) c.direction = gd_direction_from_string(j.at("direction").get<std::string>());
  c.T = j.value("T", c.T);
  c.M = j.value("M", c.M);
  c.data_driven_a = j.value("data_driven_a", c.data_driven_a);
  if (j.contains("init")) c.init = init_kind_from_string(j.at("init").get<std::string>());
}

void to_json(json& j, const StabilityRecord& r) {
  j = json{{"pair", r.pair},       {"t", r.t},
           {"beta_N_t", r.beta_N_t}, {"v_dev_t", r.v_dev_t},
           {"op_dist", r.op_dist}, {"bound", r.bound},
           {"bound_statement", r.bound_statement}, {"bound_proof", r.bound_proof},
           {"K", r.K},             {"c2_hat", r.c2_hat}};
}

void from_json(const json& j, StabilityRecord& r) {
  j.at("pair").get_to(r.pair);
  j.at("t").get_to(r.t);
  j.at("beta_N_t").get_to(r.beta_N_t);
  j.at("v_dev_t").get_to(r.v_dev_t);
  j.at("op_dist").get_to(r.op_dist);
  j.at("bound").get_to(r.bound);
  j.at("bound_statement").get_to(r.bound_statement);
  j.at("bound_proof").get_to(r.bound_proof);
  j.at("K").get_to(r.K);
  j.at("c2_hat").get_to(r.c2_hat);
}

void to_json(json& j, const PathRecord& r) {
  j = json{{"n", r.n},           {"tau", r.tau},   {"overlap", r.overlap},
           {"energy", r.energy}, {"jump", r.jump}, {"within_mu", r.within_mu}};
}

void from_json(const json& j, PathRecord& r) {
  j.at("n").get_to(r.n);
  j.at("tau").get_to(r.tau);
  j.at("overlap").get_to(r.overlap);
  j.at("energy").get_to(r.energy);
  j.at("jump").get_to(r.jump);
  j.at("within_mu").get_to(r.within_mu);
}

void to_json(json& j, const ConcentrationRecord& r) {
  j = json{{"quantity", to_string(r.quantity)},
           {"N", r.N},
           {"replicas", r.replicas},
           {"empirical_mean", r.empirical_mean},
           {"empirical_std", r.empirical_std},
           {"values", r.values}};
}

void from_json(const json& j, ConcentrationRecord& r) {
  r.quantity = quantity_from_string(j.at("quantity").get<std::string>());
  j.at("N").get_to(r.N);
  j.at("replicas").get_to(r.replicas);
  j.at("empirical_mean").get_to(r.empirical_mean);
  j.at("empirical_std").get_to(r.empirical_std);
  j.at("values").get_to(r.values);
}

void to_json(json& j, const OverlapSample& s) {
  j = json{{"tau_i", s.tau_i},
           {"tau_j", s.tau_j},
           {"energy_i", s.energy_i},
           {"energy_j", s.energy_j},
           {"overlap", s.overlap}};
}

void from_json(const json& j, OverlapSample& s) {
  j.at("tau_i").get_to(s.tau_i);
  j.at("tau_j").get_to(s.tau_j);
  j.at("energy_i").get_to(s.energy_i);
  j.at("energy_j").get_to(s.energy_j);
  j.at("overlap").get_to(s.overlap);
}

void to_json(json& j, const OgpReport& r) {
  j = json{{"tau_grid", r.tau_grid},
           {"mu", r.mu},
           {"min_width", r.min_width},
           {"bin_width", r.bin_width},
           {"set_sizes", r.set_sizes},
           {"eta_per_tau", r.eta_per_tau},
           {"samples", r.samples},
           {"histogram", r.histogram}};
  j["gap"] = r.gap ? json::array({r.gap->first, r.gap->second}) : json(nullptr);
}

void from_json(const json& j, OgpReport& r) {
  j.at("tau_grid").get_to(r.tau_grid);
  j.at("mu").get_to(r.mu);
  j.at("min_width").get_to(r.min_width);
  j.at("bin_width").get_to(r.bin_width);
  j.at("set_sizes").get_to(r.set_sizes);
  j.at("eta_per_tau").get_to(r.eta_per_tau);
  j.at("samples").get_to(r.samples);
  j.at("histogram").get_to(r.histogram);
  const auto& g = j.at("gap");
  if (g.is_null()) {
    r.gap.reset();
  } else {
    r.gap = std::pair{g.at(0).get<double>(), g.at(1).get<double>()};
  }
}

void to_json(json& j, const ChaosReport& r) {
  j = json{{"pairs", r.pairs},
           {"p", r.p},
           {"N", r.N},
           {"seed", r.seed},
           {"mu", r.mu},
           {"mean_abs_overlap", r.mean_abs_overlap},
           {"max_abs_overlap", r.max_abs_overlap},
           {"overlaps", r.overlaps}};
}

void from_json(const json& j, ChaosReport& r) {
  j.at("pairs").get_to(r.pairs);
  j.at("p").get_to(r.p);
  j.at("N").get_to(r.N);
  j.at("seed").get_to(r.seed);
  j.at("mu").get_to(r.mu);
  j.at("mean_abs_overlap").get_to(r.mean_abs_overlap);
  j.at("max_abs_overlap").get_to(r.max_abs_overlap);
  j.at("overlaps").get_to(r.overlaps);
}

void to_json(json& j, const GroundStateResult& r) {
  j = json{{"eta_N", r.eta_N},
           {"minimizers", r.minimizers},
           {"representatives", r.representatives},
           {"states_evaluated", r.states_evaluated}};
}

void from_json(const json& j, GroundStateResult& r) {
  j.at("eta_N").get_to(r.eta_N);
  j.at("minimizers").get_to(r.minimizers);
  j.at("representatives").get_to(r.representatives);
  j.at("states_evaluated").get_to(r.states_evaluated);
}

void to_json(json& j, const RoundingResult& r) {
  j = json{{"sigma", r.sigma},
           {"step_multipliers", r.step_multipliers},
           {"objective_before", r.objective_before},
           {"objective_after", r.objective_after},
           {"distinct_index_deltas", r.distinct_index_deltas}};
}

void from_json(const json& j, RoundingResult& r) {
  j.at("sigma").get_to(r.sigma);
  j.at("step_multipliers").get_to(r.step_multipliers);
  j.at("objective_before").get_to(r.objective_before);
  j.at("objective_after").get_to(r.objective_after);
  j.at("distinct_index_deltas").get_to(r.distinct_index_deltas);
}

void to_json(json& j, const ScheduleReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"t", s.t},
                     {"f_max_quotient", s.f_max_quotient},
                     {"F_max_quotient", s.F_max_quotient},
                     {"f_at_zero", s.f_at_zero},
                     {"f_violates", s.f_violates},
                     {"F_violates", s.F_violates}});
  }
  j = json{{"schedule_name", r.schedule_name}, {"zeta", r.zeta},   {"tolerance", r.tolerance},
           {"samples", r.samples},             {"steps", steps},   {"ok", r.ok},
           {"violations", r.violations}};
}

json trace_to_json(const IterationTrace& trace, bool full) {
  json j{{"schedule_name", trace.schedule_name},
         {"truncation_M", trace.truncation_M},
         {"step_norms", trace.step_norms},
         {"V", trace.V}};
  j["tensor_provenance"] = trace.tensor_provenance ? json(*trace.tensor_provenance) : json(nullptr);
  if (full) j["U"] = trace.U;
  return j;
}

IterationTrace trace_from_json(const json& j) {
  IterationTrace t;
  j.at("schedule_name").get_to(t.schedule_name);
  j.at("truncation_M").get_to(t.truncation_M);
  j.at("step_norms").get_to(t.step_norms);
  j.at("V").get_to(t.V);
  if (!j.at("tensor_provenance").is_null()) t.tensor_provenance = j.at("tensor_provenance").get<Provenance>();
  if (j.contains("U")) j.at("U").get_to(t.U);
  return t;
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("cannot parse number '" + std::string(s) + "'");
  }
  return x;
}

namespace {

std::string meta_line(const RunMetadata* meta) {
  return meta ? "# meta " + json(*meta).dump() + "\n" : std::string();
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) out += ',';
    out += cells[k];
  }
  return out + "\n";
}

// Data rows of a CSV file with the header checked and comment lines dropped.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  bool seen_header = false;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != header) throw InvalidArgument("unexpected CSV header '" + line + "'");
      seen_header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (!seen_header) throw InvalidArgument("CSV header missing");
  return rows;
}

void require_columns(const std::vector<std::string>& row, std::size_t n) {
  if (row.size() != n) throw InvalidArgument("CSV row has the wrong number of columns");
}

int parse_int(const std::string& s) {
  int x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("cannot parse integer '" + s + "'");
  }
  return x;
}

const std::string kStabilityHeader =
    "pair,t,beta_N_t,v_dev_t,op_dist,bound,K,bound_statement,bound_proof,c2_hat";
const std::string kPathHeader = "n,tau,overlap,energy,jump,within_mu";
const std::string kConcentrationHeader = "replica,value";
const std::string kOverlapHeader = "tau_i,tau_j,energy_i,energy_j,overlap";

}  // namespace

std::string stability_csv(const std::vector<StabilityRecord>& rows, const RunMetadata* meta) {
  std::string out = meta_line(meta) + kStabilityHeader + "\n";
  for (const auto& r : rows) {
    out += join({std::to_string(r.pair), std::to_string(r.t), format_double(r.beta_N_t),
                 format_double(r.v_dev_t), format_double(r.op_dist), format_double(r.bound),
                 format_double(r.K), format_double(r.bound_statement),
                 format_double(r.bound_proof), format_double(r.c2_hat)});
  }
  return out;
}

std::vector<StabilityRecord> parse_stability_csv(const std::string& text) {
  std::vector<StabilityRecord> out;
  for (const auto& c : csv_rows(text, kStabilityHeader)) {
    require_columns(c, 10);
    out.push_back({parse_int(c[0]), parse_int(c[1]), parse_double(c[2]), parse_double(c[3]),
                   parse_double(c[4]), parse_double(c[5]), parse_double(c[7]),
                   parse_double(c[8]), parse_double(c[6]), parse_double(c[9])});
  }
  return out;
}

std::string path_csv(const std::vector<PathRecord>& rows, const RunMetadata* meta) {
  std::string out = meta_line(meta) + kPathHeader + "\n";
  for (const auto& r : rows) {
    out += join({std::to_string(r.n), format_double(r.tau), format_double(r.overlap),
                 format_double(r.energy), format_double(r.jump), r.within_mu ? "1" : "0"});
  }
  return out;
}

std::vector<PathRecord> parse_path_csv(const std::string& text) {
  std::vector<PathRecord> out;
  for (const auto& c : csv_rows(text, kPathHeader)) {
    require_columns(c, 6);
    out.push_back({parse_int(c[0]), parse_double(c[1]), parse_double(c[2]), parse_double(c[3]),
                   parse_double(c[4]), parse_int(c[5]) != 0});
  }
  return out;
}

std::string concentration_csv(const ConcentrationRecord& rec, const RunMetadata* meta) {
  std::string out = meta_line(meta) + kConcentrationHeader + "\n";
  for (std::size_t r = 0; r < rec.values.size(); ++r) {
    out += join({std::to_string(r), format_double(rec.values[r])});
  }
  return out;
}

std::vector<double> parse_concentration_csv(const std::string& text) {
  std::vector<double> out;
  for (const auto& c : csv_rows(text, kConcentrationHeader)) {
    require_columns(c, 2);
    if (parse_int(c[0]) != static_cast<int>(out.size())) {
      throw InvalidArgument("concentration CSV replicas out of order");
    }
    out.push_back(parse_double(c[1]));
  }
  return out;
}

std::string overlaps_csv(const std::vector<OverlapSample>& rows, const RunMetadata* meta) {
  std::string out = meta_line(meta) + kOverlapHeader + "\n";
  for (const auto& s : rows) {
    out += join({std::to_string(s.tau_i), std::to_string(s.tau_j), format_double(s.energy_i),
                 format_double(s.energy_j), format_double(s.overlap)});
  }
  return out;
}

std::vector<OverlapSample> parse_overlaps_csv(const std::string& text) {
  std::vector<OverlapSample> out;
  for (const auto& c : csv_rows(text, kOverlapHeader)) {
    require_columns(c, 5);
    out.push_back({parse_int(c[0]), parse_int(c[1]), parse_double(c[2]), parse_double(c[3]),
                   parse_double(c[4])});
  }
  return out;
}

std::string trace_csv(const IterationTrace& trace, const RunMetadata* meta) {
  std::string out = meta_line(meta) + "step,norm,min,max\n";
  for (std::size_t t = 0; t < trace.U.size(); ++t) {
    const auto& u = trace.U[t];
    double lo = u.empty() ? 0.0 : u[0], hi = lo;
    for (double x : u) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    out += join({std::to_string(t), format_double(trace.step_norms[t]), format_double(lo),
                 format_double(hi)});
  }
  return out;
}

std::string rounding_csv(const RoundingResult& r, const RunMetadata* meta) {
  std::string out = meta_line(meta) + "j,multiplier,delta\n";
  for (std::size_t j = 0; j < r.step_multipliers.size(); ++j) {
    out += join({std::to_string(j), format_double(r.step_multipliers[j]),
                 format_double(r.distinct_index_deltas[j])});
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace pspin
