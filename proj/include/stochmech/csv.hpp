#pragma once

// Locale-independent CSV output. Doubles are written with 17 significant
// digits so every value round-trips.

#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stochmech/errors.hpp"
#include "stochmech/field.hpp"
#include "stochmech/histogram.hpp"
#include "stochmech/langevin.hpp"

namespace stochmech {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header) : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    row_begin();
    for (auto h : header) cell(h);
    end_row();
  }

  CsvWriter& cell(std::string_view s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  template <std::integral I>
  CsvWriter& cell(I v) {
    return cell(std::string_view(std::to_string(v)));
  }

  void end_row() {
    out_ << '\n';
    row_begin();
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + path_.string());
  }

  ~CsvWriter() {
    if (out_.is_open()) out_.close();
  }

private:
  void row_begin() { first_ = true; }

  std::filesystem::path path_;
  std::ofstream out_;
  bool first_ = true;
};

// Diverged nodes carry their signed infinity, or an empty cell when the value
// is unknown.
inline std::string field_value_cell(const VelocityFieldTable& t, std::size_t j) {
  if (!t.diverged[j]) return format_double(t.values[j]);
  if (std::isinf(t.values[j])) return format_double(t.values[j]);
  return "";
}

inline void write_field_csv(const std::filesystem::path& path, const VelocityFieldTable& t) {
  CsvWriter w(path, {"x", "v", "diverged"});
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    w.cell(t.grid.node(j)).cell(field_value_cell(t, j)).cell(t.diverged[j] ? 1 : 0);
    w.end_row();
  }
  w.close();
}

inline void write_density_csv(const std::filesystem::path& path, const ResidencyHistogram& h,
                              const std::function<double(double)>& oracle) {
  CsvWriter w(path, {"x_center", "count", "density", "oracle_density"});
  const NormalizedDensity d = normalize(h);
  for (std::size_t j = 0; j < h.n_bins(); ++j) {
    w.cell(d.centers[j]).cell(h.counts()[j]).cell(d.density[j]).cell(oracle(d.centers[j]));
    w.end_row();
  }
  w.close();
}

inline void write_noise_csv(const std::filesystem::path& path, std::span<const NoisePoint> noise) {
  CsvWriter w(path, {"iteration", "sigma_n"});
  for (const auto& p : noise) {
    w.cell(p.iteration).cell(p.sigma);
    w.end_row();
  }
  w.close();
}

} // namespace stochmech
