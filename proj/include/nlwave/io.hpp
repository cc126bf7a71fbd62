// File formats: coefficient tensors, quasilinear forms, sampled fields,
// solver checkpoints and the run report table.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlwave/diagnostics.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/nullform.hpp"
#include "nlwave/solver.hpp"

namespace nlwave {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FieldFormat { Csv, Binary };

// Tensor file: one line per nonzero entry "a b m n value" (0-based indices);
// lines starting with '#' are ignored.
NullFormTensor<double> load_tensor(const std::string& path);
void save_tensor(const NullFormTensor<double>& t, const std::string& path);

// Quasi form file: a line "A: a0 a1 a2" followed by three rows of m.
QuasiNullForm<double> load_quasi(const std::string& path);
void save_quasi(const QuasiNullForm<double>& q, const std::string& path);

// Field file: one-line header "n L" then n x n samples, CSV rows or flat
// little-endian doubles (row index = x1 index).
GridField<double> load_field(const std::string& path, FieldFormat format);
void save_field(const GridField<double>& f, const std::string& path, FieldFormat format);

// Checkpoint: header "t n L" plus the two arrays (u, ut).
WaveState<double> load_checkpoint(const std::string& path, FieldFormat format);
void save_checkpoint(const WaveState<double>& s, const std::string& path,
                     FieldFormat format);

// Run table: fixed column order
// t,E1,E2,ghost_E,ghost_G,ks_ratio,good_deriv_ratio,lemma31_ratio,picard_max_iters
extern const char* const kReportCsvHeader;
void write_report_csv(const std::vector<EnergyReport<double>>& rows,
                      const std::string& path);
std::vector<EnergyReport<double>> read_report_csv(const std::string& path);

}  // namespace nlwave
