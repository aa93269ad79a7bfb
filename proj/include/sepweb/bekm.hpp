#pragma once

#include <memory>

#include "sepweb/charts3.hpp"
#include "sepweb/classify.hpp"
#include "sepweb/kbd.hpp"
#include "sepweb/webs.hpp"

namespace sepweb {

struct BekmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Recursive description of a KEM web found by the separation search.
struct SeparationTree {
  enum class Kind { Benenti, Warped, Fail };
  Kind kind = Kind::Fail;
  PseudoSpace space;
  ConcircularTensor ct;              // level tensor (normalized representative)
  std::string class_key;
  std::string chart;                 // catalog case id or named 3d chart, "" if unmatched
  double chart_a = 0.0;              // chart parameter when applicable
  Mat chart_frame;                   // adapted (d,e,f) frame for named 3d charts
  std::string fail_reason;
  std::vector<std::string> leaves;   // eigenvalue descriptions at this level
  // warped data
  bool central_split = false;
  Mat fiber_frame;                   // axis split: ambient basis of the flat fiber
  Vec fiber_origin;
  double warp_c = 0.0;               // constant eigenvalue on the split eigenspace
  std::shared_ptr<SeparationTree> fiber;
  PotentialPtr fiber_potential;

  bool resolved() const;
  int leaf_total() const;
  std::string describe() const;      // single-line summary
};

struct BekmOptions {
  bool exhaustive = false;
  std::uint64_t seed = 1;
  int max_branches = 64;
  KbdOptions kbd;
};

struct BekmResult {
  KbdSolution kbd;
  std::vector<SeparationTree> trees;      // resolved branches
  std::vector<std::string> diagnostics;   // set-aside candidates etc.
};

BekmResult bekm_separate(const PotentialPtr& V, const Box& box, const BekmOptions& opts);

// warped-product split of a CT with one multidimensional eigenspace
struct WarpedSplit {
  bool central = false;
  Mat geodesic_frame;   // ambient columns spanning the 1-d eigenspaces (axis split)
  Mat fiber_frame;      // axis split: basis of the multidimensional eigenspace
  PseudoSpace fiber_space;
  double warp_c = 0.0;
  Vec probe;            // probe point used for orientation
};
WarpedSplit warped_split(const CanonicalClass& cls, const Eigenfunctions& ef,
                         const Vec& probe);

PotentialPtr restrict_potential(const PotentialPtr& V, const WarpedSplit& split);

// the n point-wise independent Killing tensors of a resolved tree (degree-2
// polynomial fields, metric included)
std::vector<PolySym2Field> ks_space(const SeparationTree& tree, const Box& box,
                                    std::uint64_t seed = 99);

// the assembled characteristic Killing tensor of a resolved tree
PolySym2Field witness_tensor(const SeparationTree& tree, const Box& box,
                             std::uint64_t seed = 77);

// chart lookup for the witness of named 3d charts
Chart3 tree_chart3(const SeparationTree& tree);

// sphere-restricted KBD solve used in the central-split recursion: returns an
// orthonormal ambient-A basis of the nullspace (the trivial direction included)
struct SphereKbd {
  std::vector<Mat> basis;
  std::vector<double> singular_values;
  bool includes_trivial = false;
};
SphereKbd sphere_kbd_solve(const PotentialPtr& V_on_sphere, const PseudoSpace& sphere,
                           std::uint64_t seed, int n_samples = 40);

std::string tree_to_dot(const SeparationTree& tree);

}  // namespace sepweb
