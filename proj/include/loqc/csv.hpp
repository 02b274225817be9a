#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "loqc/analysis.hpp"
#include "loqc/tuner.hpp"

namespace loqc::csv {

/// 12 significant digits, locale-independent.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

inline constexpr const char* kSweepHeader =
    "eta_src,eta_det,min_fidelity,alpha,beta,gamma,success_argmin,success_basis_avg";
inline constexpr const char* kLandscapeHeader = "d_eta1,d_eta2,min_fidelity";
inline constexpr const char* kOptimizeHeader =
    "eta_src,eta_det,mode,eta1,eta2,min_fidelity,baseline_fidelity,success_ratio";

inline std::string sweep(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows)
    os << num(r.eta_src) << ',' << num(r.eta_det) << ',' << num(r.min_fidelity) << ',' << num(r.argmin.alpha) << ','
       << num(r.argmin.beta) << ',' << num(r.argmin.gamma) << ',' << num(r.success_at_argmin) << ','
       << num(r.success_avg_basis) << '\n';
  return os.str();
}

inline std::string landscape(std::span<const double> d_eta1, std::span<const double> d_eta2,
                             const std::vector<std::vector<std::optional<double>>>& values) {
  std::ostringstream os;
  os << kLandscapeHeader << '\n';
  for (std::size_t i = 0; i < d_eta1.size(); ++i)
    for (std::size_t j = 0; j < d_eta2.size(); ++j)
      os << num(d_eta1[i]) << ',' << num(d_eta2[j]) << ',' << num(values[i][j]) << '\n';
  return os.str();
}

struct OptimizeRow {
  EfficiencyConfig eff;
  std::string mode;
  double eta1 = 0.0, eta2 = 0.0, min_fidelity = 0.0, baseline = 0.0, success_ratio = 0.0;
};

inline OptimizeRow optimize_row(const TuneResult& r, std::string mode) {
  return {r.eff, std::move(mode), r.eta1, r.eta2, r.min_fidelity, r.baseline_min_fidelity, r.success_ratio()};
}

inline std::string optimize(std::span<const OptimizeRow> rows) {
  std::ostringstream os;
  os << kOptimizeHeader << '\n';
  for (const auto& r : rows)
    os << num(r.eff.eta_src) << ',' << num(r.eff.eta_det) << ',' << r.mode << ',' << num(r.eta1) << ','
       << num(r.eta2) << ',' << num(r.min_fidelity) << ',' << num(r.baseline) << ',' << num(r.success_ratio) << '\n';
  return os.str();
}

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace loqc::csv
