#include "csmlab/experiment_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace csmlab {
namespace {

constexpr std::array<char, 8> kCheckpointMagic{'C', 'S', 'M', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr const char* kCheckpointLayout =
    "2*n*n complex coefficients, little-endian float64 (re, im) pairs; x component then y component; "
    "each component row-major over (ky, kx) with index i -> wavenumber i for i < n/2 and i - n otherwise; "
    "coefficients carry the 1/n^2 forward-transform factor";

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  if (!obj.is_object()) throw InvalidInput((prefix.empty() ? std::string("config") : prefix) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw InvalidInput(join_path(prefix, key) + ": unknown key");
  }
}

double get_number(const Json& obj, const std::string& key, double fallback, const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw InvalidInput(join_path(prefix, key) + ": expected a number");
  return it->get<double>();
}

long long get_integer(const Json& obj, const std::string& key, long long fallback, const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_number_integer()) return it->get<long long>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e15) return static_cast<long long>(v);
  }
  throw InvalidInput(join_path(prefix, key) + ": expected an integer");
}

std::string get_string(const Json& obj, const std::string& key, const std::string& fallback,
                       const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw InvalidInput(join_path(prefix, key) + ": expected a string");
  return it->get<std::string>();
}

ModelParams parse_params(const Json& doc, int n, double length) {
  ModelParams p;
  p.delta = length / n;
  if (doc.is_null()) return p;
  const std::string prefix = "params";
  reject_unknown_keys(doc, {"nu", "cs", "delta", "s", "eddy_variant", "closure_sign"}, prefix);
  p.nu = get_number(doc, "nu", p.nu, prefix);
  p.cs = get_number(doc, "cs", p.cs, prefix);
  p.delta = get_number(doc, "delta", p.delta, prefix);
  p.s = get_number(doc, "s", p.s, prefix);
  p.eddy_variant = eddy_variant_from_string(get_string(doc, "eddy_variant", to_string(p.eddy_variant), prefix));
  p.closure_sign = closure_sign_from_string(get_string(doc, "closure_sign", to_string(p.closure_sign), prefix));
  return p;
}

ForcingSpec parse_forcing(const Json& doc) {
  ForcingSpec f;
  if (doc.is_null()) return f;
  const std::string prefix = "forcing";
  reject_unknown_keys(doc, {"kind", "amplitude", "active_modes", "decay_rate"}, prefix);
  f.kind = forcing_kind_from_string(get_string(doc, "kind", to_string(f.kind), prefix));
  f.amplitude = get_number(doc, "amplitude", f.amplitude, prefix);
  f.decay_rate = get_number(doc, "decay_rate", f.decay_rate, prefix);
  if (auto it = doc.find("active_modes"); it != doc.end()) {
    if (!it->is_array()) throw InvalidInput("forcing.active_modes: expected an array of [kx, ky] pairs");
    f.active_modes.clear();
    for (const auto& mode : *it) {
      if (!mode.is_array() || mode.size() != 2 || !mode[0].is_number_integer() || !mode[1].is_number_integer())
        throw InvalidInput("forcing.active_modes: expected integer pairs [kx, ky]");
      f.active_modes.push_back({mode[0].get<int>(), mode[1].get<int>()});
    }
  }
  return f;
}

InitialCondition parse_initial_condition(const Json& doc) {
  InitialCondition ic;
  if (doc.is_null()) return ic;
  const std::string prefix = "initial_condition";
  auto kind_from = [&](const std::string& name) {
    if (name == "TaylorGreen") return InitialCondition::Kind::TaylorGreen;
    if (name == "BandLimitedSeeded") return InitialCondition::Kind::BandLimitedSeeded;
    if (name == "FromCheckpoint") return InitialCondition::Kind::FromCheckpoint;
    throw InvalidInput("initial_condition.kind: unknown initial condition '" + name + "'");
  };
  if (doc.is_string()) {
    ic.kind = kind_from(doc.get<std::string>());
    return ic;
  }
  reject_unknown_keys(doc, {"kind", "seed", "energy", "path"}, prefix);
  ic.kind = kind_from(get_string(doc, "kind", "TaylorGreen", prefix));
  const long long seed = get_integer(doc, "seed", static_cast<long long>(ic.seed), prefix);
  if (seed < 0) throw InvalidInput("initial_condition.seed: must be >= 0");
  ic.seed = static_cast<std::uint64_t>(seed);
  ic.energy = get_number(doc, "energy", ic.energy, prefix);
  ic.path = get_string(doc, "path", ic.path, prefix);
  return ic;
}

const std::set<std::string> kRunKeys{"model", "n", "length", "dt", "t_end", "record_every", "params", "forcing",
                                     "initial_condition"};

RunConfig parse_run_fields(const Json& doc) {
  RunConfig c;
  const long long n = get_integer(doc, "n", c.n, "");
  if (n < 8 || n > 4096 || n % 2 != 0) throw InvalidInput("n: grid size must be even, >= 8 and <= 4096");
  c.n = static_cast<int>(n);
  c.length = get_number(doc, "length", c.length, "");
  c.dt = get_number(doc, "dt", c.dt, "");
  c.t_end = get_number(doc, "t_end", c.t_end, "");
  const long long every = get_integer(doc, "record_every", c.record_every, "");
  if (every < 1 || every > 1'000'000'000) throw InvalidInput("record_every: must be >= 1");
  c.record_every = static_cast<int>(every);
  if (!(c.length > 0.0)) throw InvalidInput("length: domain length must be > 0");
  c.params = parse_params(doc.value("params", Json()), c.n, c.length);
  c.forcing = parse_forcing(doc.value("forcing", Json()));
  c.initial_condition = parse_initial_condition(doc.value("initial_condition", Json()));
  return c;
}

Json run_fields_to_json(const RunConfig& c) {
  Json doc;
  doc["n"] = c.n;
  doc["length"] = c.length;
  doc["dt"] = c.dt;
  doc["t_end"] = c.t_end;
  doc["record_every"] = c.record_every;
  doc["params"] = {{"nu", c.params.nu},
                   {"cs", c.params.cs},
                   {"delta", c.params.delta},
                   {"s", c.params.s},
                   {"eddy_variant", to_string(c.params.eddy_variant)},
                   {"closure_sign", to_string(c.params.closure_sign)}};
  Json modes = Json::array();
  for (const auto& [kx, ky] : c.forcing.active_modes) modes.push_back({kx, ky});
  doc["forcing"] = {{"kind", to_string(c.forcing.kind)},
                    {"amplitude", c.forcing.amplitude},
                    {"active_modes", modes},
                    {"decay_rate", c.forcing.decay_rate}};
  Json ic = {{"kind", to_string(c.initial_condition.kind)}};
  switch (c.initial_condition.kind) {
    case InitialCondition::Kind::TaylorGreen: break;
    case InitialCondition::Kind::BandLimitedSeeded:
      ic["seed"] = c.initial_condition.seed;
      ic["energy"] = c.initial_condition.energy;
      break;
    case InitialCondition::Kind::FromCheckpoint: ic["path"] = c.initial_condition.path; break;
  }
  doc["initial_condition"] = ic;
  return doc;
}

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Reads a headered numeric CSV; `expected_header` empty accepts any header.
CsvTable read_numeric_csv(const std::filesystem::path& path, const std::string& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.empty()) throw InvalidInput(path.string() + ": empty file, expected a header line");

  CsvTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t last_good = 0;
  while (pos < content.size()) {
    const std::size_t end = content.find('\n', pos);
    ++line_no;
    if (end == std::string::npos) {
      throw InvalidInput(path.string() + ": truncated at line " + std::to_string(line_no) +
                         " (missing newline); last good line " + std::to_string(last_good));
    }
    std::string line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    if (line_no == 1) {
      if (!expected_header.empty() && line != expected_header)
        throw InvalidInput(path.string() + ": schema mismatch, expected header '" + expected_header + "'");
      table.columns = split(line, ',');
      last_good = 1;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != table.columns.size())
      throw InvalidInput(path.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " fields, expected " + std::to_string(table.columns.size()) + "; last good line " +
                         std::to_string(last_good));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      try {
        row.push_back(parse_double(cell));
      } catch (const InvalidInput&) {
        throw InvalidInput(path.string() + ": line " + std::to_string(line_no) + " has malformed number '" + cell +
                           "'; last good line " + std::to_string(last_good));
      }
    }
    table.rows.push_back(std::move(row));
    last_good = line_no;
  }
  if (table.columns.empty()) throw InvalidInput(path.string() + ": missing header line");
  return table;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

double get_f64(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

// Configs ---------------------------------------------------------------------

RunConfig parse_run_config(const Json& doc) {
  reject_unknown_keys(doc, kRunKeys, "");
  RunConfig c = parse_run_fields(doc);
  c.model = model_kind_from_string(get_string(doc, "model", "NSE", ""));
  c.validate();
  return c;
}

PairConfig parse_pair_config(const Json& doc) {
  auto keys = kRunKeys;
  keys.insert({"epsilon", "perturbation_seed"});
  reject_unknown_keys(doc, keys, "");
  PairConfig p;
  p.u = parse_run_fields(doc);
  p.u.model = ModelKind::NSE;
  p.w = p.u;
  p.w.model = ModelKind::CSM;
  p.epsilon = get_number(doc, "epsilon", p.epsilon, "");
  if (!(p.epsilon >= 0.0) || !std::isfinite(p.epsilon)) throw InvalidInput("epsilon: must be finite and >= 0");
  const long long seed = get_integer(doc, "perturbation_seed", static_cast<long long>(p.perturbation_seed), "");
  if (seed < 0) throw InvalidInput("perturbation_seed: must be >= 0");
  p.perturbation_seed = static_cast<std::uint64_t>(seed);
  p.u.validate();
  p.w.validate();
  return p;
}

AnyConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw InvalidInput("config: expected a JSON object");
  const std::string model = get_string(doc, "model", "NSE", "");
  if (model == "Pair") return parse_pair_config(doc);
  return parse_run_config(doc);
}

AnyConfig load_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

Json to_json(const RunConfig& config) {
  Json doc = run_fields_to_json(config);
  doc["model"] = to_string(config.model);
  return doc;
}

Json to_json(const PairConfig& config) {
  Json doc = run_fields_to_json(config.u);
  doc["model"] = "Pair";
  doc["epsilon"] = config.epsilon;
  doc["perturbation_seed"] = config.perturbation_seed;
  return doc;
}

Json to_json(const AnyConfig& config) {
  return std::visit([](const auto& c) { return to_json(c); }, config);
}

std::string canonical_json(const Json& doc) { return doc.dump(); }

std::string config_digest(const Json& doc) {
  const std::string text = canonical_json(doc);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{md[i]};
  return hex.str();
}

// Series ----------------------------------------------------------------------

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) throw InvalidInput("malformed number '" + text + "'");
  return value;
}

void write_series(const std::vector<DiagnosticRecord>& records, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kSeriesHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.t) << ',' << format_double(r.l2_sq) << ',' << format_double(r.hs_sq) << ','
        << format_double(r.grad_hs_sq) << ',' << format_double(r.forcing_hs_sq) << ',' << format_double(r.cum_grad_hs)
        << ',' << format_double(r.cum_forcing_hs) << ',' << format_double(r.divergence_residual) << '\n';
  }
  finish_write(out, path);
}

std::vector<DiagnosticRecord> read_series(const std::filesystem::path& path) {
  const CsvTable table = read_numeric_csv(path, kSeriesHeader);
  std::vector<DiagnosticRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) records.push_back({row[0], row[1], row[2], row[3], row[4], row[5], row[6], row[7]});
  return records;
}

void write_pair_series(const std::vector<PairRecord>& records, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kPairSeriesHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.t) << ',' << format_double(r.phi_l2_sq) << ',' << format_double(r.phi_grad_l2_sq) << ','
        << format_double(r.cum_nu_phi_grad) << ',' << format_double(r.cum_forcing_hs) << '\n';
  }
  finish_write(out, path);
}

std::vector<PairRecord> read_pair_series(const std::filesystem::path& path) {
  const CsvTable table = read_numeric_csv(path, kPairSeriesHeader);
  std::vector<PairRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) records.push_back({row[0], row[1], row[2], row[3], row[4]});
  return records;
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

CsvTable read_csv(const std::filesystem::path& path) { return read_numeric_csv(path, ""); }

// Checkpoints -----------------------------------------------------------------

void checkpoint_save(const std::filesystem::path& path, const SimState& state, const std::string& config_digest) {
  const auto& grid = state.velocity.grid();
  Json header = {{"format", "csmlab-checkpoint"},
                 {"version", kCheckpointVersion},
                 {"n", grid.n()},
                 {"length", grid.length()},
                 {"t", state.t},
                 {"step_index", state.step_index},
                 {"config_digest", config_digest},
                 {"scalar", "float64"},
                 {"endianness", "little"},
                 {"layout", kCheckpointLayout}};
  const std::string header_text = header.dump();

  std::string bytes(kCheckpointMagic.begin(), kCheckpointMagic.end());
  put_u32(bytes, kCheckpointVersion);
  put_u32(bytes, static_cast<std::uint32_t>(header_text.size()));
  bytes += header_text;
  bytes.reserve(bytes.size() + 2 * grid.size() * 16);
  for (const SpectralField* component : {&state.velocity.x, &state.velocity.y}) {
    for (const Complex& c : component->coeffs()) {
      put_f64(bytes, c.real());
      put_f64(bytes, c.imag());
    }
  }
  auto out = open_for_write(path, std::ios::out | std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  finish_write(out, path);
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open checkpoint '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";

  if (bytes.size() < 16 || !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin()))
    throw InvalidInput(where + "not a csmlab checkpoint (bad magic at offset 0)");
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kCheckpointVersion)
    throw InvalidInput(where + "unsupported checkpoint version " + std::to_string(version) + " at offset 8");
  const std::uint32_t header_len = get_u32(bytes, 12);
  if (bytes.size() < 16 + static_cast<std::size_t>(header_len))
    throw InvalidInput(where + "truncated header: need " + std::to_string(16 + header_len) + " bytes, have " +
                       std::to_string(bytes.size()));
  Json header;
  try {
    header = Json::parse(bytes.substr(16, header_len));
  } catch (const Json::parse_error& e) {
    throw InvalidInput(where + "malformed header at offset 16: " + e.what());
  }
  const int n = header.value("n", 0);
  const double length = header.value("length", kTwoPi);
  const GridPtr grid = WavenumberGrid::make(n, length);

  const std::size_t payload_offset = 16 + header_len;
  const std::size_t expected = 2 * grid->size() * 16;
  if (bytes.size() - payload_offset != expected)
    throw InvalidInput(where + "payload size mismatch at offset " + std::to_string(payload_offset) + ": expected " +
                       std::to_string(expected) + " bytes, found " + std::to_string(bytes.size() - payload_offset));

  std::size_t offset = payload_offset;
  auto read_component = [&] {
    std::vector<Complex> coeffs(grid->size());
    for (auto& c : coeffs) {
      c = Complex(get_f64(bytes, offset), get_f64(bytes, offset + 8));
      offset += 16;
    }
    return SpectralField(grid, std::move(coeffs));
  };
  SpectralField x = read_component();
  SpectralField y = read_component();
  if (!x.is_hermitian() || !y.is_hermitian()) throw InvalidInput(where + "payload is not a real (Hermitian) field");

  VelocityField velocity(std::move(x), std::move(y));
  if (!is_solenoidal(velocity)) velocity = leray_project(std::move(velocity));
  return Checkpoint{SimState{header.value("t", 0.0), std::move(velocity), header.value("step_index", 0L)},
                    header.value("config_digest", std::string()), length};
}

// Manifests -------------------------------------------------------------------

Json to_json(const RunManifest& m) {
  Json doc = {{"config_digest", m.config_digest}, {"tool_version", m.tool_version}, {"started", m.started},
              {"finished", m.finished},           {"seed", m.seed},                 {"output_paths", m.output_paths}};
  if (m.status == "completed") {
    doc["status"] = "completed";
  } else {
    doc["status"] = {{"aborted", {{"reason", m.abort_reason}, {"message", m.abort_message}}}};
  }
  return doc;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_json(to_json(manifest), path);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  finish_write(out, path);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(path.string() + ": malformed JSON: " + e.what());
  }
}

}  // namespace csmlab
