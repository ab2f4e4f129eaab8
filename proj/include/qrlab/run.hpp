#pragma once

// Run configuration and the subcommand driver behind the qrlab binary.
//
// Defaults (one table; the CLI and config files share it):
//   section   key              default        meaning
//   run       command          classify       render | classify | certify | growth | check
//   run       map              (none)         [map.NAME] section or compact reference
//   run       profile          (from map)     built-in profile name
//   run       seed             1              seeds random sample sets
//   run       threads          0              0 = QRLAB_THREADS or hardware count
//   grid      box              -3:3,-3:3      per-axis lo:hi
//   grid      res              256            one value for all axes, or one per axis
//   grid      layer            res/2          slice of a 3D field written to images
//   escape    R                5
//   escape    N                8              horizon
//   escape    criterion        A2             A1 | A2 | hull
//   escape    budget           0              sphere samples, 0 = 4096 (2D) / 16384 (3D)
//   escape    hull_resolution  256
//   escape    bailout          0              0 = 10 x largest finite M^k(R)
//   certify   a, b             2, 2 alpha     rho window in units of M^n(R); alpha = 4 when unknown
//   certify   candidates       257
//   growth    r1, rho, nmax    2, 0.5, 8
//   growth    points           64             grid points per generation
//   check     name             hypothesis     modulus | escape-radius | ratio | hypothesis |
//                                             covering | r-independence
//   check     alpha, delta     (profile), 0.3
//   check     A                2              ratio check factor
//   check     r_lo, r_hi       10, 1e6        log grid for modulus / ratio / hypothesis
//   check     grid_points      64
//   check     r, beta          4, 2           covering check (alpha shared)
//   check     points           100            random points for r-independence
//   output    dir, prefix      ., qrlab
//
// Exit status: 0 success, 1 a check or certificate failed, 2 configuration
// error, 3 numeric overflow, 4 unsupported combination.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qrlab/config.hpp"
#include "qrlab/error.hpp"
#include "qrlab/escape.hpp"
#include "qrlab/grid.hpp"

namespace qrlab {

enum class Command { render, classify, certify, growth, check };

const char* to_string(Command c);
Command parse_command(const std::string& text);

struct RunConfig {
  Command command = Command::classify;
  std::string map_ref;      // empty = none
  std::string profile_ref;  // empty = derived from the map
  std::uint64_t seed = 1;
  int threads = 0;

  std::vector<grid::Interval> box{{-3.0, 3.0}, {-3.0, 3.0}};
  std::vector<int> res{256};
  int layer = -1;

  double R = 5.0;
  int N = 8;
  Criterion criterion = Criterion::A2;
  int budget = 0;
  int hull_resolution = 256;
  double bailout = 0.0;

  double a = 2.0;
  double b = 0.0;
  int candidates = 257;

  double r1 = 2.0;
  double rho = 0.5;
  int nmax = 8;
  int points_per_generation = 64;

  std::string check = "hypothesis";
  double alpha = 0.0;
  double delta = 0.3;
  double A = 2.0;
  double r_lo = 10.0;
  double r_hi = 1e6;
  int grid_points = 64;
  double covering_r = 4.0;
  double beta = 2.0;
  int points = 100;

  std::string out_dir = ".";
  std::string prefix = "qrlab";

  // Source of [map.NAME] sections, if the config came from a file.
  std::shared_ptr<const ConfigDocument> document;

  grid::GridSpec grid_spec() const;
};

int exit_code(ErrorKind kind);

// Parses "lo:hi,lo:hi[,lo:hi]".
std::vector<grid::Interval> parse_box(const std::string& text);
std::vector<int> parse_resolution(const std::string& text);

RunConfig config_from_document(const ConfigDocument& doc);
RunConfig load_config(const std::string& path);

// Checks cross-field requirements (map present where needed, map reference
// resolvable, ranges sane). Throws ErrorKind::config.
void validate(const RunConfig& cfg);
MapDescriptor resolve_map(const RunConfig& cfg);

// Executes the command, writing files under cfg.out_dir and a short report to
// `out`. Returns the exit status; errors are caught and mapped to statuses with
// a message on `err`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace qrlab
