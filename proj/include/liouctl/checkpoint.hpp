#pragma once

// Field checkpoints and CSV output.
//
// Checkpoint layout (text, version 1):
//   liouctl-field 1
//   gate <name>
//   horizon <T>
//   steps <n>
//   fwhm <w>
//   channels <k> <name_1> ... <name_k>
//   config_hash <16 hex digits>
//   iterations <count>
//   infidelity <IF>
//   data
//   <eps_1(t_0)> ... <eps_k(t_0)>        one row per interval, %.17g
//   ...

#include <string>
#include <vector>

#include "liouctl/control_field.hpp"

namespace liouctl {

struct FieldCheckpoint {
  static constexpr int kVersion = 1;
  std::string gate;
  ControlField field;
  std::string config_hash;
  int iterations = 0;
  double infidelity = 1.0;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_checkpoint(const FieldCheckpoint& cp);
FieldCheckpoint parse_checkpoint(const std::string& text);

void write_checkpoint(const std::string& path, const FieldCheckpoint& cp);
FieldCheckpoint read_checkpoint(const std::string& path);

/// Header row and fixed-width scientific rows with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<double>& row(std::size_t i) const { return rows_[i]; }

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

std::string format_csv_value(double v);

}  // namespace liouctl
