#include "qrlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "qrlab/error.hpp"

namespace qrlab::grid {

GridSpec::GridSpec(std::vector<Interval> box, std::vector<int> resolution) {
  require(box.size() == resolution.size(), "grid: box and resolution rank differ");
  require(box.size() == 2 || box.size() == 3, "grid: only m = 2 or m = 3 grids are supported");
  dim_ = static_cast<int>(box.size());
  count_ = 1;
  for (int a = 0; a < dim_; ++a) {
    require(resolution[a] >= 2, "grid: resolution must be at least 2 per axis");
    require(std::isfinite(box[a].lo) && std::isfinite(box[a].hi) && box[a].hi > box[a].lo,
            "grid: box intervals must be finite and non-degenerate");
    box_[a] = box[a];
    res_[a] = resolution[a];
    stride_[a] = count_;
    count_ *= static_cast<std::size_t>(resolution[a]);
  }
}

GridSpec GridSpec::square(double lo, double hi, int res) { return GridSpec({{lo, hi}, {lo, hi}}, {res, res}); }

GridSpec GridSpec::cube(double lo, double hi, int res) {
  return GridSpec({{lo, hi}, {lo, hi}, {lo, hi}}, {res, res, res});
}

CellCoord GridSpec::unravel(std::size_t idx) const {
  CellCoord c{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    c[a] = static_cast<int>(idx % static_cast<std::size_t>(res_[a]));
    idx /= static_cast<std::size_t>(res_[a]);
  }
  return c;
}

std::size_t GridSpec::index(const CellCoord& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) idx += static_cast<std::size_t>(c[a]) * stride_[a];
  return idx;
}

Coords GridSpec::center(std::size_t idx) const {
  const CellCoord c = unravel(idx);
  Coords x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = box_[a].lo + (c[a] + 0.5) * cell_width(a);
  return x;
}

std::optional<std::size_t> GridSpec::locate(std::span<const double> p) const {
  if (static_cast<int>(p.size()) < dim_) return std::nullopt;
  CellCoord c{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    if (!(p[a] >= box_[a].lo && p[a] <= box_[a].hi)) return std::nullopt;
    int i = static_cast<int>(std::floor((p[a] - box_[a].lo) / cell_width(a)));
    c[a] = std::clamp(i, 0, res_[a] - 1);
  }
  return index(c);
}

std::optional<std::size_t> GridSpec::nearest_cell(std::span<const double> p) const {
  if (static_cast<int>(p.size()) < dim_) return std::nullopt;
  CellCoord c{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    if (!(p[a] >= box_[a].lo && p[a] <= box_[a].hi)) return std::nullopt;
    // Ties between two centers resolve to the lower index.
    double t = (p[a] - box_[a].lo) / cell_width(a) - 0.5;
    int i = static_cast<int>(std::ceil(t - 0.5));
    c[a] = std::clamp(i, 0, res_[a] - 1);
  }
  return index(c);
}

bool GridSpec::on_frame(std::size_t idx) const {
  const CellCoord c = unravel(idx);
  for (int a = 0; a < dim_; ++a)
    if (c[a] == 0 || c[a] == res_[a] - 1) return true;
  return false;
}

GridMask::GridMask(GridSpec spec) : spec_(std::move(spec)), cells_(spec_.cell_count(), 0) {}

GridMask::GridMask(GridSpec spec, std::vector<std::uint8_t> occupancy)
    : spec_(std::move(spec)), cells_(std::move(occupancy)) {
  require(cells_.size() == spec_.cell_count(), "grid: occupancy length differs from cell count");
  for (auto& c : cells_) c = c ? 1 : 0;
}

std::size_t GridMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool GridMask::subset_of(const GridMask& other) const {
  require(spec_ == other.spec_, "grid: masks on different grids");
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i] && !other.cells_[i]) return false;
  return true;
}

GridMask GridMask::complement() const {
  GridMask out(spec_);
  for (std::size_t i = 0; i < cells_.size(); ++i) out.cells_[i] = cells_[i] ? 0 : 1;
  return out;
}

GridMask GridMask::operator|(const GridMask& other) const {
  require(spec_ == other.spec_, "grid: masks on different grids");
  GridMask out(spec_);
  for (std::size_t i = 0; i < cells_.size(); ++i) out.cells_[i] = cells_[i] | other.cells_[i];
  return out;
}

GridMask GridMask::operator&(const GridMask& other) const {
  require(spec_ == other.spec_, "grid: masks on different grids");
  GridMask out(spec_);
  for (std::size_t i = 0; i < cells_.size(); ++i) out.cells_[i] = cells_[i] & other.cells_[i];
  return out;
}

namespace {

double norm2(const Coords& x, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += x[a] * x[a];
  return std::sqrt(s);
}

double norm_inf(const Coords& x, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s = std::max(s, std::abs(x[a]));
  return s;
}

template <class Pred>
GridMask fill_by_center(const GridSpec& spec, Pred&& inside) {
  GridMask mask(spec);
  for (std::size_t i = 0; i < spec.cell_count(); ++i)
    if (inside(spec.center(i))) mask.set(i);
  return mask;
}

}  // namespace

Rasterization rasterize(const Region& region, const GridSpec& spec) {
  const int dim = spec.dimension();
  GridMask mask = std::visit(
      [&](const auto& r) -> GridMask {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, Ball>) {
          require(static_cast<int>(r.center.size()) == dim, "rasterize: ball center has wrong dimension");
          return fill_by_center(spec, [&](const Coords& c) {
            Coords d{0, 0, 0};
            for (int a = 0; a < dim; ++a) d[a] = c[a] - r.center[a];
            return norm2(d, dim) < r.radius;
          });
        } else if constexpr (std::is_same_v<R, EuclideanAnnulus>) {
          return fill_by_center(spec, [&](const Coords& c) {
            const double n = norm2(c, dim);
            return n > r.inner && n < r.outer;
          });
        } else if constexpr (std::is_same_v<R, SupNormAnnulus>) {
          return fill_by_center(spec, [&](const Coords& c) {
            const double n = norm_inf(c, dim);
            return n > r.inner && n < r.outer;
          });
        } else if constexpr (std::is_same_v<R, HalfSpace>) {
          require(static_cast<int>(r.normal.size()) == dim, "rasterize: half-space normal has wrong dimension");
          return fill_by_center(spec, [&](const Coords& c) {
            double s = 0.0;
            for (int a = 0; a < dim; ++a) s += r.normal[a] * c[a];
            return s > r.offset;
          });
        } else {
          GridMask m(spec);
          for (std::size_t idx : r.cells) {
            require(idx < spec.cell_count(), "rasterize: cell index out of range");
            m.set(idx);
          }
          return m;
        }
      },
      region);
  const bool empty = mask.empty();
  return {std::move(mask), empty};
}

std::size_t ComponentLabeling::bounded_count() const {
  return static_cast<std::size_t>(std::count(bounded.begin(), bounded.end(), true));
}

GridMask ComponentLabeling::component_mask(std::int32_t label) const {
  GridMask m(spec);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) m.set(i);
  return m;
}

ComponentLabeling components(const GridMask& mask, bool of_complement) {
  const GridSpec& spec = mask.spec();
  const std::size_t n = spec.cell_count();
  const std::uint8_t want = of_complement ? 0 : 1;
  ComponentLabeling out{spec, std::vector<std::int32_t>(n, kNoLabel), {}, {}};

  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (mask.occupancy()[seed] != want || out.labels[seed] != kNoLabel) continue;
    const auto label = static_cast<std::int32_t>(out.bounded.size());
    bool touches_frame = false;
    std::size_t size = 0;
    out.labels[seed] = label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++size;
      if (spec.on_frame(cur)) touches_frame = true;
      spec.for_each_face_neighbor(cur, [&](std::size_t nb) {
        if (mask.occupancy()[nb] == want && out.labels[nb] == kNoLabel) {
          out.labels[nb] = label;
          stack.push_back(nb);
        }
      });
    }
    out.bounded.push_back(!touches_frame);
    out.sizes.push_back(size);
  }
  return out;
}

GridMask hull(const GridMask& mask) {
  // Flood the complement from the frame; whatever is not reached is either in
  // the mask or in a bounded complementary component.
  const GridSpec& spec = mask.spec();
  const std::size_t n = spec.cell_count();
  std::vector<std::uint8_t> outside(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask.at(i) && spec.on_frame(i)) {
      outside[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    spec.for_each_face_neighbor(cur, [&](std::size_t nb) {
      if (!mask.at(nb) && !outside[nb]) {
        outside[nb] = 1;
        stack.push_back(nb);
      }
    });
  }
  for (auto& c : outside) c = c ? 0 : 1;
  return GridMask(spec, std::move(outside));
}

bool is_topologically_convex(const GridMask& mask) { return hull(mask) == mask; }

GridMask dilate(const GridMask& mask, int steps) {
  GridMask cur = mask;
  for (int s = 0; s < steps; ++s) {
    GridMask next = cur;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (!cur.at(i)) continue;
      cur.spec().for_each_face_neighbor(i, [&](std::size_t nb) { next.set(nb); });
    }
    cur = std::move(next);
  }
  return cur;
}

GridMask inner_boundary(const GridMask& mask) {
  const GridSpec& spec = mask.spec();
  GridMask out(spec);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.at(i)) continue;
    bool edge = spec.on_frame(i);
    spec.for_each_face_neighbor(i, [&](std::size_t nb) { edge = edge || !mask.at(nb); });
    if (edge) out.set(i);
  }
  return out;
}

GridMask slice(const GridMask& mask3d, int layer) {
  const GridSpec& s = mask3d.spec();
  require(s.dimension() == 3, "slice: mask is not three-dimensional");
  require(layer >= 0 && layer < s.resolution(2), "slice: layer out of range");
  GridSpec s2({s.axis(0), s.axis(1)}, {s.resolution(0), s.resolution(1)});
  GridMask out(s2);
  for (int j = 0; j < s.resolution(1); ++j)
    for (int i = 0; i < s.resolution(0); ++i)
      if (mask3d.at(s.index({i, j, layer}))) out.set(s2.index({i, j, 0}));
  return out;
}

namespace {

void require_2d(const GridMask& mask) { require(mask.spec().dimension() == 2, "image output needs a 2D mask"); }

void write_le32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t read_le32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) fail(ErrorKind::io, "raw mask: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_pbm(const GridMask& mask, std::ostream& os) {
  require_2d(mask);
  const GridSpec& s = mask.spec();
  const int w = s.resolution(0), h = s.resolution(1);
  os << "P4\n" << w << ' ' << h << '\n';
  std::vector<char> row(static_cast<std::size_t>((w + 7) / 8));
  for (int y = h - 1; y >= 0; --y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < w; ++x)
      if (mask.at(s.index({x, y, 0}))) row[x / 8] = static_cast<char>(row[x / 8] | (0x80 >> (x % 8)));
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void write_pgm(const GridMask& mask, std::ostream& os) {
  require_2d(mask);
  const GridSpec& s = mask.spec();
  const int w = s.resolution(0), h = s.resolution(1);
  os << "P5\n" << w << ' ' << h << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(w));
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) row[x] = mask.at(s.index({x, y, 0})) ? static_cast<char>(255) : 0;
    os.write(row.data(), w);
  }
}

GridMask read_pbm(std::istream& is, const GridSpec& spec) {
  require(spec.dimension() == 2, "read_pbm: spec must be 2D");
  std::string magic;
  int w = 0, h = 0;
  is >> magic >> w >> h;
  if (!is || magic != "P4") fail(ErrorKind::io, "read_pbm: not a P4 image");
  is.get();
  if (w != spec.resolution(0) || h != spec.resolution(1)) fail(ErrorKind::io, "read_pbm: size mismatch");
  GridMask mask(spec);
  std::vector<char> row(static_cast<std::size_t>((w + 7) / 8));
  for (int y = h - 1; y >= 0; --y) {
    is.read(row.data(), static_cast<std::streamsize>(row.size()));
    if (!is) fail(ErrorKind::io, "read_pbm: truncated raster");
    for (int x = 0; x < w; ++x)
      if (static_cast<unsigned char>(row[x / 8]) & (0x80 >> (x % 8))) mask.set(spec.index({x, y, 0}));
  }
  return mask;
}

void write_raw(const GridMask& mask, std::ostream& os) {
  const GridSpec& s = mask.spec();
  os.write("QRLB", 4);
  write_le32(os, static_cast<std::uint32_t>(s.dimension()));
  for (int a = 0; a < s.dimension(); ++a) write_le32(os, static_cast<std::uint32_t>(s.resolution(a)));
  os.write(reinterpret_cast<const char*>(mask.occupancy().data()), static_cast<std::streamsize>(mask.size()));
}

GridMask read_raw(std::istream& is, const std::vector<Interval>& box) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QRLB", 4) != 0) fail(ErrorKind::io, "raw mask: bad magic");
  const std::uint32_t m = read_le32(is);
  if (m != 2 && m != 3) fail(ErrorKind::io, "raw mask: unsupported dimension");
  if (box.size() != m) fail(ErrorKind::io, "raw mask: box rank does not match header");
  std::vector<int> res;
  for (std::uint32_t a = 0; a < m; ++a) {
    const std::uint32_t r = read_le32(is);
    if (r < 2 || r > (1u << 20)) fail(ErrorKind::io, "raw mask: implausible resolution");
    res.push_back(static_cast<int>(r));
  }
  GridSpec spec(box, res);
  std::vector<std::uint8_t> cells(spec.cell_count());
  is.read(reinterpret_cast<char*>(cells.data()), static_cast<std::streamsize>(cells.size()));
  if (!is) fail(ErrorKind::io, "raw mask: truncated payload");
  return GridMask(spec, std::move(cells));
}

}  // namespace qrlab::grid
