#include "otplan/shape.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace otplan {

namespace {

constexpr std::size_t kNoExclude = static_cast<std::size_t>(-1);

bool better(double sq, std::size_t idx, double best_sq, std::size_t best_idx) {
  return sq < best_sq || (sq == best_sq && idx < best_idx);
}

}  // namespace

Shape::Shape(std::vector<Vec2> points, std::string name)
    : points_(std::move(points)), name_(std::move(name)) {
  if (points_.empty()) throw std::invalid_argument("shape must contain at least one point");
  if (points_.size() > std::size_t{0xffffffffu} - 1)
    throw std::invalid_argument("shape has too many points");
  for (const auto& p : points_) {
    if (!is_finite(p)) throw std::invalid_argument("shape contains a non-finite coordinate");
    box_.expand(p);
  }

  const double diag = box_.diagonal();
  cell_ = diag > 0.0 ? diag / std::sqrt(static_cast<double>(points_.size())) : 1.0;
  nx_ = static_cast<std::size_t>(std::floor(box_.width() / cell_)) + 1;
  ny_ = static_cast<std::size_t>(std::floor(box_.height() / cell_)) + 1;

  // CSR bucket layout; items within a cell stay in index order.
  std::vector<std::uint32_t> cell_id(points_.size());
  cell_start_.assign(nx_ * ny_ + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const std::size_t cx = cell_of(points_[i].x, box_.lo.x, nx_);
    const std::size_t cy = cell_of(points_[i].y, box_.lo.y, ny_);
    cell_id[i] = static_cast<std::uint32_t>(cy * nx_ + cx);
    ++cell_start_[cell_id[i] + 1];
  }
  for (std::size_t c = 0; c < nx_ * ny_; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(points_.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i)
    cell_items_[fill[cell_id[i]]++] = static_cast<std::uint32_t>(i);

  if (points_.size() > 1) {
    std::vector<double> gaps(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
      gaps[i] = std::sqrt(search(points_[i], i).sq_dist);
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    resolution_ = *mid;
  }
}

std::size_t Shape::cell_of(double coord, double lo, std::size_t count) const {
  const double c = std::floor((coord - lo) / cell_);
  if (!(c > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(c), count - 1);
}

NearestPoint Shape::nearest_point(const Vec2& x) const { return search(x, kNoExclude); }

NearestPoint Shape::search(const Vec2& x, std::size_t exclude) const {
  const auto cx0 = static_cast<std::ptrdiff_t>(cell_of(x.x, box_.lo.x, nx_));
  const auto cy0 = static_cast<std::ptrdiff_t>(cell_of(x.y, box_.lo.y, ny_));
  const auto nx = static_cast<std::ptrdiff_t>(nx_);
  const auto ny = static_cast<std::ptrdiff_t>(ny_);
  const std::ptrdiff_t max_ring =
      std::max({cx0, nx - 1 - cx0, cy0, ny - 1 - cy0});

  double best_sq = kInfinity;
  std::size_t best = kNoExclude;

  auto scan_cell = [&](std::ptrdiff_t cx, std::ptrdiff_t cy) {
    if (cx < 0 || cy < 0 || cx >= nx || cy >= ny) return;
    const std::size_t c = static_cast<std::size_t>(cy * nx + cx);
    for (std::uint32_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
      const std::size_t idx = cell_items_[k];
      if (idx == exclude) continue;
      const double sq = squared_distance(x, points_[idx]);
      if (better(sq, idx, best_sq, best)) {
        best_sq = sq;
        best = idx;
      }
    }
  };

  for (std::ptrdiff_t ring = 0; ring <= max_ring; ++ring) {
    if (ring == 0) {
      scan_cell(cx0, cy0);
    } else {
      for (std::ptrdiff_t dx = -ring; dx <= ring; ++dx) {
        scan_cell(cx0 + dx, cy0 - ring);
        scan_cell(cx0 + dx, cy0 + ring);
      }
      for (std::ptrdiff_t dy = -ring + 1; dy <= ring - 1; ++dy) {
        scan_cell(cx0 - ring, cy0 + dy);
        scan_cell(cx0 + ring, cy0 + dy);
      }
    }
    // Anything in ring+1 or beyond is at least ring * cell away.
    const double bound = static_cast<double>(ring) * cell_;
    if (best != kNoExclude && best_sq < bound * bound * (1.0 - 1e-9)) break;
  }

  if (best == kNoExclude) return {x, kInfinity, kNoExclude};
  return {points_[best], best_sq, best};
}

Shape Shape::translated(const Vec2& offset) const {
  std::vector<Vec2> moved(points_.begin(), points_.end());
  for (auto& p : moved) p += offset;
  return Shape(std::move(moved), name_);
}

NearestPoint nearest_point_exhaustive(std::span<const Vec2> points, const Vec2& x) {
  if (points.empty()) throw std::invalid_argument("empty point set");
  NearestPoint out{points[0], squared_distance(x, points[0]), 0};
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double sq = squared_distance(x, points[i]);
    if (better(sq, i, out.sq_dist, out.index)) out = {points[i], sq, i};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text and bitmap ingestion

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::string read_file(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Shape parse_shape_text(std::string_view text, std::string name) {
  std::vector<Vec2> pts;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::string_view fields[2];
    std::size_t nfields = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == ','))
        ++pos;
      if (pos >= line.size()) break;
      const std::size_t start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != ',')
        ++pos;
      if (nfields == 2) {
        nfields = 3;
        break;
      }
      fields[nfields++] = line.substr(start, pos - start);
    }
    Vec2 p;
    if (nfields != 2 || !parse_double(fields[0], p.x) || !parse_double(fields[1], p.y))
      throw std::invalid_argument("shape line " + std::to_string(line_no) +
                                  ": expected two numbers");
    pts.push_back(p);
  }
  return Shape(std::move(pts), std::move(name));
}

Shape load_shape_file(const std::filesystem::path& path) {
  return parse_shape_text(read_file(path, std::ios::in), path.stem().string());
}

std::string format_shape_text(const Shape& shape) {
  std::string out = "# " + shape.name() + " (" + std::to_string(shape.size()) + " points)\n";
  char buf[64];
  for (const auto& p : shape.points()) {
    auto r = std::to_chars(buf, buf + sizeof buf, p.x);
    *r.ptr++ = ' ';
    r = std::to_chars(r.ptr, buf + sizeof buf, p.y);
    *r.ptr++ = '\n';
    out.append(buf, r.ptr);
  }
  return out;
}

Shape parse_pgm_shape(std::string_view bytes, int threshold, double domain_M, std::string name) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space_and_comments();
    long value = 0;
    auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
    if (ec != std::errc{} || value <= 0)
      throw std::invalid_argument(std::string("pgm: bad ") + what);
    pos = static_cast<std::size_t>(ptr - bytes.data());
    return value;
  };

  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw std::invalid_argument("pgm: missing P5 magic");
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (maxval > 65535) throw std::invalid_argument("pgm: bad maxval");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw std::invalid_argument("pgm: malformed header");
  ++pos;

  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const auto npix = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < npix * bpp) throw std::invalid_argument("pgm: truncated pixel data");

  const double scale = 2.0 * domain_M / static_cast<double>(std::max(width, height));
  const double ox = -0.5 * scale * static_cast<double>(width);
  const double oy = 0.5 * scale * static_cast<double>(height);
  std::vector<Vec2> pts;
  for (long row = 0; row < height; ++row) {
    for (long col = 0; col < width; ++col) {
      const std::size_t k = pos + (static_cast<std::size_t>(row * width + col)) * bpp;
      int v = static_cast<unsigned char>(bytes[k]);
      if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[k + 1]);
      if (v < threshold)
        pts.push_back({ox + (static_cast<double>(col) + 0.5) * scale,
                       oy - (static_cast<double>(row) + 0.5) * scale});
    }
  }
  if (pts.empty()) throw std::invalid_argument("pgm: no pixel below threshold");
  return Shape(std::move(pts), std::move(name));
}

Shape load_pgm_shape(const std::filesystem::path& path, int threshold, double domain_M) {
  return parse_pgm_shape(read_file(path, std::ios::in | std::ios::binary), threshold, domain_M,
                         path.stem().string());
}

// ---------------------------------------------------------------------------
// Generators

namespace shapes {

std::vector<Vec2> circle(Vec2 center, double radius, std::size_t count) {
  if (count == 0 || !(radius >= 0.0)) throw std::invalid_argument("circle: bad parameters");
  std::vector<Vec2> pts(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    pts[k] = center + Vec2{radius * std::cos(a), radius * std::sin(a)};
  }
  return pts;
}

std::vector<Vec2> segment_chain(std::span<const Vec2> vertices, double spacing, bool closed) {
  if (vertices.empty() || !(spacing > 0.0)) throw std::invalid_argument("segment_chain: bad parameters");
  std::vector<Vec2> pts;
  const std::size_t nseg = closed ? vertices.size() : vertices.size() - 1;
  for (std::size_t s = 0; s < nseg; ++s) {
    const Vec2 a = vertices[s];
    const Vec2 b = vertices[(s + 1) % vertices.size()];
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(distance(a, b) / spacing)));
    for (std::size_t k = 0; k < pieces; ++k)
      pts.push_back(a + (static_cast<double>(k) / static_cast<double>(pieces)) * (b - a));
  }
  if (!closed || vertices.size() == 1) pts.push_back(vertices.back());
  return pts;
}

namespace {

double segment_sq_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = squared_norm(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return squared_distance(p, a + t * ab);
}

template <typename Keep>
std::vector<Vec2> lattice_in_box(Box2 box, double spacing, Keep keep) {
  std::vector<Vec2> pts;
  const auto i0 = static_cast<long>(std::ceil(box.lo.x / spacing));
  const auto i1 = static_cast<long>(std::floor(box.hi.x / spacing));
  const auto j0 = static_cast<long>(std::ceil(box.lo.y / spacing));
  const auto j1 = static_cast<long>(std::floor(box.hi.y / spacing));
  for (long j = j0; j <= j1; ++j) {
    for (long i = i0; i <= i1; ++i) {
      const Vec2 p{static_cast<double>(i) * spacing, static_cast<double>(j) * spacing};
      if (keep(p)) pts.push_back(p);
    }
  }
  return pts;
}

}  // namespace

std::vector<Vec2> polygon_fill(std::span<const Vec2> vertices, double spacing) {
  if (vertices.size() < 3 || !(spacing > 0.0)) throw std::invalid_argument("polygon_fill: bad parameters");
  Box2 box;
  for (const auto& v : vertices) box.expand(v);
  return lattice_in_box(box, spacing, [&](const Vec2& p) {
    bool inside = false;
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
      const Vec2& a = vertices[i];
      const Vec2& b = vertices[j];
      if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
        inside = !inside;
    }
    return inside;
  });
}

std::vector<Vec2> thick_stroke(std::span<const std::vector<Vec2>> polylines, double half_width,
                               double spacing) {
  if (!(half_width >= 0.0) || !(spacing > 0.0)) throw std::invalid_argument("thick_stroke: bad parameters");
  Box2 box;
  for (const auto& line : polylines)
    for (const auto& v : line) box.expand(v);
  box.lo -= Vec2{half_width, half_width};
  box.hi += Vec2{half_width, half_width};
  const double hw2 = half_width * half_width;
  return lattice_in_box(box, spacing, [&](const Vec2& p) {
    for (const auto& line : polylines) {
      if (line.size() == 1 && squared_distance(p, line[0]) <= hw2) return true;
      for (std::size_t k = 0; k + 1 < line.size(); ++k)
        if (segment_sq_distance(p, line[k], line[k + 1]) <= hw2) return true;
    }
    return false;
  });
}

std::vector<Vec2> q_glyph(const QGlyph& g) {
  // Ring centerline as a fine closed polygon, tail as one straight stroke
  // heading down-right from inside the ring.
  std::vector<Vec2> ring = circle(g.center, g.ring_radius, 256);
  ring.push_back(ring.front());
  const Vec2 dir = Vec2{1.0, -1.0} * (1.0 / std::sqrt(2.0));
  const Vec2 start = g.center + (0.55 * g.ring_radius) * dir;
  const std::vector<std::vector<Vec2>> strokes{ring, {start, start + g.tail_length * dir}};
  return thick_stroke(strokes, g.half_width, g.spacing);
}

}  // namespace shapes

}  // namespace otplan
