#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flashcrowd/campaign.hpp"
#include "flashcrowd/peersim.hpp"
#include "flashcrowd/urnball.hpp"

namespace flashcrowd {

// File-system and file-format failures; the CLI maps these to its I/O exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Floating-point fields are stamped with "%.12g"; traces use fixed "%.6f".
std::string format_double(double v);

// Writes content to path via a sibling temp file and an atomic rename, so a
// failure never leaves a partial file at path. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);  // throws IoError

// header: model,policy,rho,N,reps,statistic,mean,stderr
std::string estimates_csv(ModelKind model, double rho, const std::vector<Estimate>& rows);

struct EstimateRow {
  std::string model;
  std::string policy;
  double rho = 0.0;
  std::int64_t n = 0;
  std::int64_t reps = 0;
  std::string statistic;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};
std::vector<EstimateRow> parse_estimates_csv(const std::string& content);  // throws IoError

// header: t,idle_fraction,servers,asleep (t and idle_fraction as %.6f)
std::string trace_csv(const IdleTrace& trace);

// header: statistic,value; indexes print as integers, times as %.12g,
// unresolved milestones as empty values.
std::string milestones_csv(const MilestoneRecord& record);

// header: urn_index,count (urns 1..k_max)
std::string occupancy_csv(const Occupancy& occ);

// header: n,T_n,P_n (rows 1..k, requires k <= realized prefix)
std::string realization_csv(const RandomUrnRealization& realization, std::int64_t k);

struct SlopeRow {
  std::string statistic;
  std::string mode;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
// header: statistic,mode,slope,intercept,r_squared
std::string slopes_csv(const std::vector<SlopeRow>& rows);
std::vector<SlopeRow> parse_slopes_csv(const std::string& content);  // throws IoError

// header: policy,statistic,reference,fitted,deviation,flagged
std::string table1_csv(const SlopeComparison& cmp);
// Fixed-width text rendering of the same comparison.
std::string table1_text(const SlopeComparison& cmp);

}  // namespace flashcrowd
