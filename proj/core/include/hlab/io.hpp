#pragma once

// Serialization of reports to CSV/JSON, deterministic float formatting, and
// the output manifest.  Timestamps appear only in the manifest so that all
// data files are byte-identical across reruns of the same configuration.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hlab/comparison.hpp"
#include "hlab/extinction.hpp"
#include "hlab/harnack.hpp"
#include "hlab/solver.hpp"

namespace hlab::io {

// Locale-free decimal formatting with 17 significant digits (std::to_chars).
std::string format_double(double x);

// Output root precedence: HARNACK_LAB_OUT environment variable, then the
// configured root, then "./out".
std::filesystem::path resolve_output_root(const std::string& configured_root);

// Writes content creating parent directories; throws ConfigError on failure.
void write_text_file(const std::filesystem::path& file, const std::string& content);

// 64-bit FNV-1a over the raw bytes.
std::uint64_t fnv1a_checksum(const std::string& bytes);

// ---- Report serializers ------------------------------------------------------

std::string certificate_json(const CertificateReport& report);

// Columns: direction, x0, t0, r, c, theta, extremum, empirical_mu, pass,
// skipped, reason.
std::string sweep_csv(const SweepTable& table);
std::string sweep_aggregate_json(const SweepTable& table);

std::string harnack_report_json(const HarnackQuery& query, const HarnackReport& report);

std::string chain_trace_json(const ChainParams& params, const ChainTrace& trace);

std::string extinction_json(const ExtinctionReport& report);
// Columns: t, v, v^{2-q}.
std::string norm_curve_csv(const ExtinctionReport& report);

std::string sobolev_json(const ExponentTriple& e, const SobolevResult& result);

// Columns: q, in_range, extinct, extinction_time, v0, v_end, floor, t_max.
std::string dichotomy_csv(const std::vector<DichotomyRow>& rows);

// Long format, columns: t, r, u (one row per node per snapshot).
std::string trajectory_csv(const Trajectory& traj);
std::string trajectory_meta_json(const Trajectory& traj);

// ---- Manifest ----------------------------------------------------------------

struct ManifestEntry {
  std::string path;  // relative to the output root
  std::uintmax_t bytes = 0;
  std::string fnv1a;  // 16 hex digits
};

class Manifest {
 public:
  // Records a file already written under root (checksums its bytes).
  void add(const std::filesystem::path& root, const std::string& relative_path);
  // complete = false flags partial output (some step failed after files were
  // written).  The generated_at timestamp lives only here.
  std::string to_json(bool complete) const;
  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::vector<ManifestEntry> entries_;
};

}  // namespace hlab::io
