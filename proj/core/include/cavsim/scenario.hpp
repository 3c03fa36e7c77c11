#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cavsim/dynamics.hpp"

namespace cavsim {

// A full run description parsed from a JSON scenario file. Every numeric
// key in the file must carry a unit suffix (power_W, waist_um, ...); bare
// numeric keys are rejected. Array-valued keys apply the suffix to every
// element. See scenarios/*.json for the schema in use.
struct Scenario {
  std::string label;
  RunConfig run;
  double probe_noise_rms = 0.0;      // reflection-dip readout noise
  double probe_span_Hz = 2e6;
  std::string sweep_parameter;       // empty = no sweep axis
  std::vector<double> sweep_values;  // in the parameter's own unit
  std::string out_dir = "out";
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Collects every violation before throwing.
struct ValidationError : std::runtime_error {
  std::vector<std::string> violations;
  explicit ValidationError(std::vector<std::string> v);
};
struct UnknownParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

// Canonical serialization; parse(serialize(s)) reproduces s exactly.
std::string serialize_scenario(const Scenario& s);

// FNV-1a over the canonical serialization.
std::uint64_t scenario_hash(const Scenario& s);
std::uint64_t fnv1a(const void* data, std::size_t n);
std::uint64_t fnv1a_file(const std::string& path);

// Applies one sweep-axis assignment (e.g. "comp_power_W" = 2.8).
void apply_parameter(Scenario& s, const std::string& parameter, double value);

// Per-point seed for a sweep: pure in (master, parameter, value).
std::uint64_t sweep_seed(std::uint64_t master, const std::string& parameter,
                         double value);

// CSV and manifest emission. Columns documented in the README.
void write_trace_csv(const std::string& path, const EnsembleTrace& trace);
void write_table_csv(const std::string& path,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

// manifest.json: config hash, seed, and an FNV-1a checksum per output file.
void write_manifest(const std::string& out_dir, const Scenario& scenario,
                    const std::vector<std::string>& files);

// Executes the scenario end to end: a single run, or one run per sweep
// value with per-value derived seeds. Writes trace CSVs, sweep.csv when
// sweeping, the resolved config and the manifest into out_dir; returns
// the manifest file list.
std::vector<std::string> run_bundle(const AtomicData& data, const Scenario& s,
                                    bool snapshot = false);

}  // namespace cavsim
