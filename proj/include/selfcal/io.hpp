#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfcal/covariance.hpp"
#include "selfcal/geometry.hpp"

namespace selfcal {

/// One incremental motion of a sensor frame, from its previous sample to this
/// one, in the sensor's own frame.
struct RelativePoseMeasurement {
  double t = 0.0;  // seconds
  std::string sensor_id;
  Pose delta;
  std::optional<Matrix6> cov;  // twist coordinates [rho; phi]
};

/// Parses one JSONL line ({"t","sensor","q":[w,x,y,z],"p":[x,y,z],"cov"?}).
/// Throws ParseError on malformed content or a non-PD covariance.
[[nodiscard]] RelativePoseMeasurement parse_measurement(std::string_view line);

/// Serializes a measurement as one JSON object; doubles round-trip exactly.
[[nodiscard]] std::string format_measurement(const RelativePoseMeasurement& m);

/// Reads a JSONL stream. Measurements without "cov" receive `default_cov`.
/// Throws ParseError naming the line on malformed input, and naming the
/// sensor and timestamp when a sensor's timestamps are not strictly increasing.
[[nodiscard]] std::vector<RelativePoseMeasurement> read_stream(
    std::istream& in, const Matrix6& default_cov = default_measurement_covariance());
[[nodiscard]] std::vector<RelativePoseMeasurement> read_stream(
    const std::filesystem::path& path,
    const Matrix6& default_cov = default_measurement_covariance());

void write_stream(std::span<const RelativePoseMeasurement> stream, std::ostream& out);
void write_stream(std::span<const RelativePoseMeasurement> stream,
                  const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Report rows
// ---------------------------------------------------------------------------

enum class ReportKind { kEstimate, kEntropy, kSwapEvent, kDecayEvent, kObservability };

[[nodiscard]] std::string_view to_string(ReportKind kind);
[[nodiscard]] std::optional<ReportKind> report_kind_from_string(std::string_view s);

/// Fixed payload column names of a row kind.
///   estimate      tx,ty,tz,rx,ry,rz,entropy
///   entropy       candidate_entropy,worst_pq_entropy
///   swap_event    evicted_index,inserted_entropy,pq_solve_count
///   decay_event   segment_index,weight
///   observability obs_tx,obs_ty,obs_tz,obs_rx,obs_ry,obs_rz,numerical_rank
[[nodiscard]] std::span<const std::string_view> payload_names(ReportKind kind);

struct ReportRow {
  double t = 0.0;
  ReportKind kind = ReportKind::kEstimate;
  std::vector<double> payload;  // same length and order as payload_names(kind)

  [[nodiscard]] double value(std::string_view name) const;
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Row factories; these are the only places payload order is spelled out.
[[nodiscard]] ReportRow make_estimate_row(double t, const Pose& theta, double entropy);
[[nodiscard]] ReportRow make_entropy_row(double t, double candidate_entropy,
                                         double worst_pq_entropy);
[[nodiscard]] ReportRow make_swap_row(double t, long evicted_index,
                                      double inserted_entropy, long pq_solve_count);
[[nodiscard]] ReportRow make_decay_row(double t, long segment_index, double weight);
[[nodiscard]] ReportRow make_observability_row(double t, const Vector6& scores,
                                               int numerical_rank);

/// All report columns after `t,kind`, in schema order. Every report file uses
/// this full header; cells outside a row's own schema stay empty.
[[nodiscard]] std::vector<std::string_view> report_columns();

/// CSV with header `t,kind,<payload names>` and 9 significant digits.
void write_report(std::span<const ReportRow> rows, std::ostream& out);
void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path);

[[nodiscard]] std::vector<ReportRow> read_report(std::istream& in);
[[nodiscard]] std::vector<ReportRow> read_report(const std::filesystem::path& path);

}  // namespace selfcal
