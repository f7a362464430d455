#include "liouctl/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace liouctl {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CheckpointError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

template <typename T>
T expect(std::istream& in, const std::string& key) {
  std::string word;
  if (!(in >> word) || word != key) throw CheckpointError("checkpoint: expected '" + key + "'");
  T value;
  if (!(in >> value)) throw CheckpointError("checkpoint: bad value for '" + key + "'");
  return value;
}

// operator>> on double rejects "inf"/"nan" spellings from %.17g, which a field never holds anyway.
double read_double(std::istream& in, const std::string& what) {
  std::string token;
  if (!(in >> token)) throw CheckpointError("checkpoint: missing " + what);
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size()) throw CheckpointError("checkpoint: bad number '" + token + "' in " + what);
  return v;
}

}  // namespace

std::string format_checkpoint(const FieldCheckpoint& cp) {
  const ControlField& f = cp.field;
  std::ostringstream out;
  out << "liouctl-field " << FieldCheckpoint::kVersion << "\n";
  out << "gate " << cp.gate << "\n";
  out << "horizon " << fmt17(f.horizon()) << "\n";
  out << "steps " << f.n_steps() << "\n";
  out << "fwhm " << fmt17(f.fwhm()) << "\n";
  out << "channels " << f.n_channels();
  for (const auto& n : f.names()) out << " " << n;
  out << "\n";
  out << "config_hash " << (cp.config_hash.empty() ? "-" : cp.config_hash) << "\n";
  out << "iterations " << cp.iterations << "\n";
  out << "infidelity " << fmt17(cp.infidelity) << "\n";
  out << "data\n";
  for (int j = 0; j < f.n_steps(); ++j) {
    for (int k = 0; k < f.n_channels(); ++k) out << (k ? " " : "") << fmt17(f.values()(k, j));
    out << "\n";
  }
  return out.str();
}

FieldCheckpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "liouctl-field") throw CheckpointError("not a field checkpoint");
  if (version != FieldCheckpoint::kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  FieldCheckpoint cp;
  cp.gate = expect<std::string>(in, "gate");
  std::string word;
  if (!(in >> word) || word != "horizon") throw CheckpointError("checkpoint: expected 'horizon'");
  const double horizon = read_double(in, "horizon");
  const int steps = expect<int>(in, "steps");
  if (!(in >> word) || word != "fwhm") throw CheckpointError("checkpoint: expected 'fwhm'");
  const double fwhm = read_double(in, "fwhm");
  const int channels = expect<int>(in, "channels");
  if (channels < 1 || steps < 1) throw CheckpointError("checkpoint: empty field");
  std::vector<std::string> names(static_cast<std::size_t>(channels));
  for (auto& n : names)
    if (!(in >> n)) throw CheckpointError("checkpoint: missing channel name");
  cp.config_hash = expect<std::string>(in, "config_hash");
  if (cp.config_hash == "-") cp.config_hash.clear();
  cp.iterations = expect<int>(in, "iterations");
  if (!(in >> word) || word != "infidelity") throw CheckpointError("checkpoint: expected 'infidelity'");
  cp.infidelity = read_double(in, "infidelity");
  if (!(in >> word) || word != "data") throw CheckpointError("checkpoint: expected 'data'");
  try {
    cp.field = ControlField(horizon, steps, names, fwhm);
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  for (int j = 0; j < steps; ++j)
    for (int k = 0; k < channels; ++k) cp.field.values()(k, j) = read_double(in, "data row " + std::to_string(j));
  if (in >> word) throw CheckpointError("checkpoint: trailing data");
  return cp;
}

void write_checkpoint(const std::string& path, const FieldCheckpoint& cp) { write_file(path, format_checkpoint(cp)); }

FieldCheckpoint read_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

std::string format_csv_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("CSV table needs at least one column");
}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw std::invalid_argument("CSV row width does not match the header");
  rows_.push_back(values);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_csv_value(r[i]);
    out += "\n";
  }
  return out;
}

void CsvTable::write(const std::string& path) const { write_file(path, str()); }

}  // namespace liouctl
