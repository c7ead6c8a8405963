#include "selfcal/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Cholesky>

#include "json.hpp"
#include "selfcal/errors.hpp"

namespace selfcal {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 7> kEstimateNames = {
    "tx", "ty", "tz", "rx", "ry", "rz", "entropy"};
constexpr std::array<std::string_view, 2> kEntropyNames = {"candidate_entropy",
                                                           "worst_pq_entropy"};
constexpr std::array<std::string_view, 3> kSwapNames = {
    "evicted_index", "inserted_entropy", "pq_solve_count"};
constexpr std::array<std::string_view, 2> kDecayNames = {"segment_index", "weight"};
constexpr std::array<std::string_view, 7> kObservabilityNames = {
    "obs_tx", "obs_ty", "obs_tz", "obs_rx", "obs_ry", "obs_rz", "numerical_rank"};

constexpr std::array<ReportKind, 5> kAllKinds = {
    ReportKind::kEstimate, ReportKind::kEntropy, ReportKind::kSwapEvent,
    ReportKind::kDecayEvent, ReportKind::kObservability};

std::vector<double> read_numbers(const json& j, const char* key, std::size_t n) {
  if (!j.contains(key)) throw ParseError(fmt::format("missing key \"{}\"", key));
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != n) {
    throw ParseError(fmt::format("\"{}\" must be an array of {} numbers", key, n));
  }
  std::vector<double> out;
  out.reserve(n);
  for (const json& v : a) {
    if (!v.is_number()) throw ParseError(fmt::format("\"{}\" holds a non-number", key));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(fmt::format("\"{}\" holds a non-finite value", key));
    out.push_back(x);
  }
  return out;
}

std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

bool is_symmetric_positive_definite(const Matrix6& cov, double tol) {
  if (!cov.allFinite()) return false;
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  const Eigen::LLT<Matrix6> llt(0.5 * (cov + cov.transpose()));
  return llt.info() == Eigen::Success;
}

RelativePoseMeasurement parse_measurement(std::string_view line) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ParseError("expected a JSON object");

  RelativePoseMeasurement m;
  if (!j.contains("t") || !j.at("t").is_number()) throw ParseError("missing numeric \"t\"");
  m.t = j.at("t").get<double>();
  if (!std::isfinite(m.t) || m.t < 0.0) throw ParseError("\"t\" must be a non-negative real");
  if (!j.contains("sensor") || !j.at("sensor").is_string()) {
    throw ParseError("missing string \"sensor\"");
  }
  m.sensor_id = j.at("sensor").get<std::string>();

  const auto q = read_numbers(j, "q", 4);
  const auto p = read_numbers(j, "p", 3);
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  if (quat.norm() < 1e-12) throw ParseError("\"q\" has zero norm");
  m.delta = Pose(quat, Vector3(p[0], p[1], p[2]));

  if (j.contains("cov")) {
    const auto c = read_numbers(j, "cov", 36);
    Matrix6 cov;
    for (int r = 0; r < 6; ++r)
      for (int k = 0; k < 6; ++k) cov(r, k) = c[static_cast<std::size_t>(6 * r + k)];
    if (!is_symmetric_positive_definite(cov)) {
      throw ParseError("\"cov\" is not symmetric positive-definite");
    }
    m.cov = cov;
  }
  return m;
}

std::string format_measurement(const RelativePoseMeasurement& m) {
  const auto& q = m.delta.rotation();
  const auto& p = m.delta.translation();
  std::string s = fmt::format(
      R"({{"t":{},"sensor":{},"q":[{},{},{},{}],"p":[{},{},{}])", fmt17(m.t),
      json(m.sensor_id).dump(), fmt17(q.w()), fmt17(q.x()), fmt17(q.y()),
      fmt17(q.z()), fmt17(p.x()), fmt17(p.y()), fmt17(p.z()));
  if (m.cov) {
    s += R"(,"cov":[)";
    for (int r = 0; r < 6; ++r) {
      for (int k = 0; k < 6; ++k) {
        if (r != 0 || k != 0) s += ',';
        s += fmt17((*m.cov)(r, k));
      }
    }
    s += ']';
  }
  s += '}';
  return s;
}

std::vector<RelativePoseMeasurement> read_stream(std::istream& in,
                                                 const Matrix6& default_cov) {
  std::vector<RelativePoseMeasurement> out;
  std::map<std::string, double> last_t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RelativePoseMeasurement m;
    try {
      m = parse_measurement(line);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("line {}: {}", line_no, e.what()));
    }
    auto [it, inserted] = last_t.try_emplace(m.sensor_id, m.t);
    if (!inserted) {
      if (!(m.t > it->second)) {
        throw ParseError(fmt::format(
            "line {}: non-monotone timestamp for sensor \"{}\": t={} after t={}",
            line_no, m.sensor_id, m.t, it->second));
      }
      it->second = m.t;
    }
    if (!m.cov) m.cov = default_cov;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<RelativePoseMeasurement> read_stream(const std::filesystem::path& path,
                                                 const Matrix6& default_cov) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open stream file {}", path.string()));
  return read_stream(in, default_cov);
}

void write_stream(std::span<const RelativePoseMeasurement> stream, std::ostream& out) {
  for (const auto& m : stream) out << format_measurement(m) << '\n';
}

void write_stream(std::span<const RelativePoseMeasurement> stream,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  write_stream(stream, out);
  if (!out) throw Error(fmt::format("write to {} failed", path.string()));
}

// ---------------------------------------------------------------------------

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::kEstimate: return "estimate";
    case ReportKind::kEntropy: return "entropy";
    case ReportKind::kSwapEvent: return "swap_event";
    case ReportKind::kDecayEvent: return "decay_event";
    case ReportKind::kObservability: return "observability";
  }
  return "unknown";
}

std::optional<ReportKind> report_kind_from_string(std::string_view s) {
  for (ReportKind k : kAllKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::span<const std::string_view> payload_names(ReportKind kind) {
  switch (kind) {
    case ReportKind::kEstimate: return kEstimateNames;
    case ReportKind::kEntropy: return kEntropyNames;
    case ReportKind::kSwapEvent: return kSwapNames;
    case ReportKind::kDecayEvent: return kDecayNames;
    case ReportKind::kObservability: return kObservabilityNames;
  }
  return {};
}

double ReportRow::value(std::string_view name) const {
  const auto names = payload_names(kind);
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::out_of_range(fmt::format("{} rows have no \"{}\"", to_string(kind), name));
  }
  return payload.at(static_cast<std::size_t>(it - names.begin()));
}

ReportRow make_estimate_row(double t, const Pose& theta, double entropy) {
  const Vector3& p = theta.translation();
  const Vector3 r = theta.rotation_vector();
  return {t, ReportKind::kEstimate, {p.x(), p.y(), p.z(), r.x(), r.y(), r.z(), entropy}};
}

ReportRow make_entropy_row(double t, double candidate_entropy, double worst_pq_entropy) {
  return {t, ReportKind::kEntropy, {candidate_entropy, worst_pq_entropy}};
}

ReportRow make_swap_row(double t, long evicted_index, double inserted_entropy,
                        long pq_solve_count) {
  return {t,
          ReportKind::kSwapEvent,
          {static_cast<double>(evicted_index), inserted_entropy,
           static_cast<double>(pq_solve_count)}};
}

ReportRow make_decay_row(double t, long segment_index, double weight) {
  return {t, ReportKind::kDecayEvent, {static_cast<double>(segment_index), weight}};
}

ReportRow make_observability_row(double t, const Vector6& scores, int numerical_rank) {
  ReportRow row{t, ReportKind::kObservability, {}};
  row.payload.assign(scores.data(), scores.data() + 6);
  row.payload.push_back(static_cast<double>(numerical_rank));
  return row;
}

std::vector<std::string_view> report_columns() {
  std::vector<std::string_view> cols;
  for (ReportKind k : kAllKinds) {
    const auto names = payload_names(k);
    cols.insert(cols.end(), names.begin(), names.end());
  }
  return cols;
}

void write_report(std::span<const ReportRow> rows, std::ostream& out) {
  const auto cols = report_columns();
  out << "t,kind";
  for (auto c : cols) out << ',' << c;
  out << '\n';
  for (const ReportRow& row : rows) {
    const auto names = payload_names(row.kind);
    if (row.payload.size() != names.size()) {
      throw Error(fmt::format("{} row has {} values, schema has {}", to_string(row.kind),
                              row.payload.size(), names.size()));
    }
    out << fmt::format("{:.9g}", row.t) << ',' << to_string(row.kind);
    for (auto c : cols) {
      out << ',';
      const auto it = std::find(names.begin(), names.end(), c);
      if (it != names.end()) {
        out << fmt::format("{:.9g}", row.payload[static_cast<std::size_t>(it - names.begin())]);
      }
    }
    out << '\n';
  }
}

void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write report {}", path.string()));
  write_report(rows, out);
  if (!out) throw Error(fmt::format("write to {} failed", path.string()));
}

std::vector<ReportRow> read_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("report is empty (missing header)");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "t" || header[1] != "kind") {
    throw ParseError("report header must start with t,kind");
  }
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError(fmt::format("report line {}: expected {} cells, got {}", line_no,
                                   header.size(), cells.size()));
    }
    const auto kind = report_kind_from_string(cells[1]);
    if (!kind) throw ParseError(fmt::format("report line {}: unknown kind", line_no));
    ReportRow row{std::stod(cells[0]), *kind, {}};
    for (auto name : payload_names(*kind)) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw ParseError(fmt::format("report header lacks column {}", name));
      }
      const std::string& cell = cells[static_cast<std::size_t>(it - header.begin())];
      if (cell.empty()) {
        throw ParseError(fmt::format("report line {}: empty {}", line_no, name));
      }
      row.payload.push_back(std::strtod(cell.c_str(), nullptr));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open report {}", path.string()));
  return read_report(in);
}

}  // namespace selfcal
