#pragma once

// Rasterized subsets of boxes in R^2 / R^3, face-connected component
// labeling and topological hulls.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace qrlab::grid {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

using CellCoord = std::array<int, 3>;
using Coords = std::array<double, 3>;

class GridSpec {
 public:
  GridSpec(std::vector<Interval> box, std::vector<int> resolution);

  // Square 2D box [lo,hi]^2 with res x res cells.
  static GridSpec square(double lo, double hi, int res);
  static GridSpec cube(double lo, double hi, int res);

  int dimension() const { return dim_; }
  const Interval& axis(int a) const { return box_[a]; }
  int resolution(int a) const { return res_[a]; }
  std::size_t cell_count() const { return count_; }
  double cell_width(int a) const { return box_[a].width() / res_[a]; }

  CellCoord unravel(std::size_t idx) const;
  std::size_t index(const CellCoord& c) const;
  Coords center(std::size_t idx) const;
  // Cell containing p (half-open cells, upper box edge included).
  std::optional<std::size_t> locate(std::span<const double> p) const;
  // Cell whose center is nearest to p; p must lie in the closed box.
  std::optional<std::size_t> nearest_cell(std::span<const double> p) const;
  bool on_frame(std::size_t idx) const;

  // Calls fn(neighbor_index) for each face neighbor (4 in 2D, 6 in 3D).
  template <class Fn>
  void for_each_face_neighbor(std::size_t idx, Fn&& fn) const {
    const CellCoord c = unravel(idx);
    for (int a = 0; a < dim_; ++a) {
      if (c[a] > 0) fn(idx - stride_[a]);
      if (c[a] + 1 < res_[a]) fn(idx + stride_[a]);
    }
  }

  bool operator==(const GridSpec& o) const { return dim_ == o.dim_ && box_ == o.box_ && res_ == o.res_; }

 private:
  int dim_;
  std::array<Interval, 3> box_{};
  std::array<int, 3> res_{1, 1, 1};
  std::array<std::size_t, 3> stride_{};
  std::size_t count_ = 0;
};

class GridMask {
 public:
  explicit GridMask(GridSpec spec);
  GridMask(GridSpec spec, std::vector<std::uint8_t> occupancy);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return cells_.size(); }
  bool at(std::size_t idx) const { return cells_[idx] != 0; }
  void set(std::size_t idx, bool v = true) { cells_[idx] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  const std::vector<std::uint8_t>& occupancy() const { return cells_; }

  bool subset_of(const GridMask& other) const;
  GridMask complement() const;
  GridMask operator|(const GridMask& other) const;
  GridMask operator&(const GridMask& other) const;
  bool operator==(const GridMask& other) const { return spec_ == other.spec_ && cells_ == other.cells_; }

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> cells_;
};

// Regions. Euclidean shapes are open sets; a cell is occupied iff its center
// lies in the region.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};
// A(inner, outer) = { inner < |x| < outer }, centred at 0.
struct EuclideanAnnulus {
  double inner = 0.0;
  double outer = 0.0;
};
// A_inf(inner, outer) = { inner < |x|_inf < outer }.
struct SupNormAnnulus {
  double inner = 0.0;
  double outer = 0.0;
};
// { x : <normal, x> > offset }
struct HalfSpace {
  std::vector<double> normal;
  double offset = 0.0;
};
struct CellList {
  std::vector<std::size_t> cells;
};
using Region = std::variant<Ball, EuclideanAnnulus, SupNormAnnulus, HalfSpace, CellList>;

struct Rasterization {
  GridMask mask;
  bool empty_intersection = false;
};

Rasterization rasterize(const Region& region, const GridSpec& spec);

inline constexpr std::int32_t kNoLabel = -1;

struct ComponentLabeling {
  GridSpec spec;
  std::vector<std::int32_t> labels;  // kNoLabel for cells outside the labeled set
  std::vector<bool> bounded;         // per label; false iff the component touches the frame
  std::vector<std::size_t> sizes;    // per label

  std::size_t count() const { return bounded.size(); }
  std::size_t bounded_count() const;
  GridMask component_mask(std::int32_t label) const;
};

// Face-connected labeling of the occupied cells (or of the unoccupied cells
// when of_complement is set). Labels are numbered in scan order of their
// first cell.
ComponentLabeling components(const GridMask& mask, bool of_complement);

// The mask together with all bounded complementary components.
GridMask hull(const GridMask& mask);
bool is_topologically_convex(const GridMask& mask);

// Face-neighborhood dilation repeated `steps` times.
GridMask dilate(const GridMask& mask, int steps = 1);

// Occupied cells with at least one face neighbor outside the mask or on the frame.
GridMask inner_boundary(const GridMask& mask);

// 2D slice of a 3D mask at index `layer` along the last axis.
GridMask slice(const GridMask& mask3d, int layer);

// Portable bitmap (P4) and graymap (P5). Row 0 of the image is the top of the
// box (largest second coordinate). Occupied cells are black in P4 and 255 in P5.
void write_pbm(const GridMask& mask, std::ostream& os);
void write_pgm(const GridMask& mask, std::ostream& os);
// Reads a P4 image onto the given spec; resolution must match.
GridMask read_pbm(std::istream& is, const GridSpec& spec);

// Raw layout: "QRLB", int32 m, m int32 resolutions (little endian), then one
// byte per cell in index order (first axis fastest).
void write_raw(const GridMask& mask, std::ostream& os);
GridMask read_raw(std::istream& is, const std::vector<Interval>& box);

}  // namespace qrlab::grid
