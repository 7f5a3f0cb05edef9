#ifndef KHO_IO_HPP
#define KHO_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kho/grid.hpp"

namespace kho {

inline constexpr std::uint32_t kSnapshotVersion = 1;

// Snapshot layout, little-endian throughout:
//   "KHOW" | u32 version | u32 nq | u32 np | f64 q_min q_max p_min p_max |
//   nq*np f64 values, q-major.
std::vector<unsigned char> encode_snapshot(const Field& f);
Field decode_snapshot(const std::vector<unsigned char>& bytes,
                      FieldKind kind = FieldKind::quantum);

void write_snapshot(const Field& f, const std::filesystem::path& path);
Field read_snapshot(const std::filesystem::path& path,
                    FieldKind kind = FieldKind::quantum);

// Shortest round-trip text for a double: '.' decimal, 17 significant digits,
// independent of the C locale.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

struct DensityPlotInfo {
  double min = 0.0;
  double max = 0.0;
  double negativity_fraction = 0.0;       // share of |W| carried by W < 0
  double sign_alternation_fraction = 0.0;  // see fringe_alternation_fraction
  std::size_t width = 0;
  std::size_t height = 0;
};

// Among the top decile (by |value|) of nodes above 1e-3 max|value|, the
// fraction that has an opposite-sign node of the same support within a
// 7x7 neighbourhood.
double fringe_alternation_fraction(const Field& f);

// 16-bit binary PGM of |values|^gamma (q along x, p up), plus a JSON sidecar
// at <out>.json. With signed_channels, also <stem>_pos.pgm and <stem>_neg.pgm.
DensityPlotInfo emit_density_plot(const std::filesystem::path& snapshot,
                                  const std::filesystem::path& out, double gamma,
                                  bool signed_channels = false);

DensityPlotInfo emit_density_plot(const Field& f, const std::filesystem::path& out,
                                  double gamma, bool signed_channels = false);

}  // namespace kho

#endif  // KHO_IO_HPP
