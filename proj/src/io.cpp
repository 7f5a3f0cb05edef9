#include "kho/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "kho/error.hpp"

namespace kho {

namespace {

constexpr unsigned char kMagic[4] = {'K', 'H', 'O', 'W'};
constexpr std::size_t kHeaderBytes = 4 + 3 * 4 + 4 * 8;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b)
    out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return std::bit_cast<double>(v);
}

std::filesystem::path with_suffix(const std::filesystem::path& out,
                                  const std::string& tag) {
  auto p = out;
  p.replace_filename(out.stem().string() + tag + ".pgm");
  return p;
}

void write_pgm16(const std::filesystem::path& path, std::size_t width,
                 std::size_t height, const std::vector<std::uint16_t>& pixels) {
  std::string header = "P5\n" + std::to_string(width) + " " +
                       std::to_string(height) + "\n65535\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + 2 * pixels.size());
  for (auto v : pixels) {  // PGM samples are big-endian
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v & 0xff));
  }
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(os), ErrorCode::io, "write failed: " + path.string());
}

// Image rows run from high p to low p; columns follow q.
std::vector<std::uint16_t> render(const Field& f, double scale, double gamma,
                                  int sign) {
  const auto& g = f.grid();
  std::vector<std::uint16_t> px(g.size(), 0);
  for (std::size_t row = 0; row < g.np(); ++row) {
    const std::size_t ip = g.np() - 1 - row;
    for (std::size_t iq = 0; iq < g.nq(); ++iq) {
      double v = f(iq, ip);
      if (sign > 0) v = std::max(v, 0.0);
      if (sign < 0) v = std::max(-v, 0.0);
      double t = scale > 0.0 ? std::abs(v) / scale : 0.0;
      t = std::pow(std::clamp(t, 0.0, 1.0), gamma);
      px[row * g.nq() + iq] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
  }
  return px;
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const Field& f) {
  const auto& g = f.grid();
  require(g.nq() <= 0xffffffffu && g.np() <= 0xffffffffu, ErrorCode::io,
          "grid too large for snapshot header");
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + 8 * g.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(g.nq()));
  put_u32(out, static_cast<std::uint32_t>(g.np()));
  put_f64(out, g.q_min());
  put_f64(out, g.q_max());
  put_f64(out, g.p_min());
  put_f64(out, g.p_max());
  for (double v : f.values()) put_f64(out, v);
  return out;
}

Field decode_snapshot(const std::vector<unsigned char>& bytes, FieldKind kind) {
  require(bytes.size() >= kHeaderBytes, ErrorCode::io, "snapshot truncated");
  require(std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()),
          ErrorCode::io, "not a KHOW snapshot");
  const unsigned char* p = bytes.data() + 4;
  const auto version = get_u32(p);
  require(version == kSnapshotVersion, ErrorCode::io,
          "unsupported snapshot version " + std::to_string(version));
  const std::size_t nq = get_u32(p + 4);
  const std::size_t np = get_u32(p + 8);
  const double q_min = get_f64(p + 12);
  const double q_max = get_f64(p + 20);
  const double p_min = get_f64(p + 28);
  const double p_max = get_f64(p + 36);
  require(nq > 0 && np > 0, ErrorCode::io, "snapshot has an empty grid");
  require(bytes.size() == kHeaderBytes + 8 * nq * np, ErrorCode::io,
          "snapshot size does not match its header");
  auto symmetric = [](double lo, double hi) {
    return hi > 0.0 && std::abs(lo + hi) <= 1e-12 * hi;
  };
  require(symmetric(q_min, q_max) && symmetric(p_min, p_max), ErrorCode::io,
          "snapshot grid is not origin-symmetric");

  auto grid = PhaseSpaceGrid::from_spacing(nq, np, (q_max - q_min) / nq,
                                           (p_max - p_min) / np);
  std::vector<double> values(nq * np);
  const unsigned char* v = bytes.data() + kHeaderBytes;
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = get_f64(v + 8 * k);
  return Field(grid, kind, std::move(values));
}

void write_snapshot(const Field& f, const std::filesystem::path& path) {
  const auto bytes = encode_snapshot(f);
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(os), ErrorCode::io, "write failed: " + path.string());
}

Field read_snapshot(const std::filesystem::path& path, FieldKind kind) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  return decode_snapshot(bytes, kind);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                 std::chars_format::general, 17);
  require(ec == std::errc{}, ErrorCode::io, "number formatting failed");
  return std::string(buf, end);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::io, "cannot open " + path.string());
  os << text;
  require(static_cast<bool>(os), ErrorCode::io, "write failed: " + path.string());
}

double fringe_alternation_fraction(const Field& f) {
  const auto& g = f.grid();
  const auto vals = f.values();
  double peak = 0.0;
  for (double v : vals) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  const double floor = 1e-3 * peak;

  std::vector<double> support;
  for (double v : vals)
    if (std::abs(v) > floor) support.push_back(std::abs(v));
  if (support.empty()) return 0.0;
  auto nth = support.begin() + static_cast<std::ptrdiff_t>(support.size() * 9 / 10);
  std::nth_element(support.begin(), nth, support.end());
  const double band = *nth;

  constexpr std::ptrdiff_t r = 3;
  const auto nq = static_cast<std::ptrdiff_t>(g.nq());
  const auto np = static_cast<std::ptrdiff_t>(g.np());
  std::size_t total = 0, alternating = 0;
  for (std::ptrdiff_t i = 0; i < nq; ++i) {
    for (std::ptrdiff_t j = 0; j < np; ++j) {
      const double v = f(i, j);
      if (std::abs(v) < band || std::abs(v) <= floor) continue;
      ++total;
      bool found = false;
      for (auto a = std::max<std::ptrdiff_t>(0, i - r);
           !found && a <= std::min(nq - 1, i + r); ++a)
        for (auto b = std::max<std::ptrdiff_t>(0, j - r);
             !found && b <= std::min(np - 1, j + r); ++b) {
          const double w = f(a, b);
          found = std::abs(w) > floor && (w > 0.0) != (v > 0.0);
        }
      if (found) ++alternating;
    }
  }
  return total ? static_cast<double>(alternating) / static_cast<double>(total) : 0.0;
}

DensityPlotInfo emit_density_plot(const Field& f, const std::filesystem::path& out,
                                  double gamma, bool signed_channels) {
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument,
          "gamma must be positive");
  DensityPlotInfo info;
  const auto vals = f.values();
  info.min = *std::min_element(vals.begin(), vals.end());
  info.max = *std::max_element(vals.begin(), vals.end());
  double neg = 0.0, abs_sum = 0.0;
  for (double v : vals) {
    abs_sum += std::abs(v);
    if (v < 0.0) neg -= v;
  }
  info.negativity_fraction = abs_sum > 0.0 ? neg / abs_sum : 0.0;
  info.sign_alternation_fraction = fringe_alternation_fraction(f);
  info.width = f.grid().nq();
  info.height = f.grid().np();

  const double scale = std::max(std::abs(info.min), std::abs(info.max));
  write_pgm16(out, info.width, info.height, render(f, scale, gamma, 0));
  if (signed_channels) {
    write_pgm16(with_suffix(out, "_pos"), info.width, info.height,
                render(f, scale, gamma, +1));
    write_pgm16(with_suffix(out, "_neg"), info.width, info.height,
                render(f, scale, gamma, -1));
  }

  nlohmann::ordered_json j;
  j["min"] = info.min;
  j["max"] = info.max;
  j["negativity_fraction"] = info.negativity_fraction;
  j["sign_alternation_fraction"] = info.sign_alternation_fraction;
  j["gamma"] = gamma;
  j["width"] = info.width;
  j["height"] = info.height;
  j["q_range"] = {f.grid().q_min(), f.grid().q_max()};
  j["p_range"] = {f.grid().p_min(), f.grid().p_max()};
  auto sidecar = out;
  sidecar += ".json";
  write_text_file(sidecar, j.dump(2) + "\n");
  return info;
}

DensityPlotInfo emit_density_plot(const std::filesystem::path& snapshot,
                                  const std::filesystem::path& out, double gamma,
                                  bool signed_channels) {
  return emit_density_plot(read_snapshot(snapshot), out, gamma, signed_channels);
}

}  // namespace kho
