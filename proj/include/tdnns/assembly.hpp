// Variational assembly of the mixed plate system, boundary conditions,
// hybridization with static condensation, solve drivers, and field recovery.
//
// Unknowns: bending moment M (symmetric tensor), rotation theta (vector),
// deflection w (scalar), and -- in hybrid mode -- an edge multiplier lambda
// representing the normal rotation trace on the global edge normal.
//
// The monolithic system has the symmetric saddle point form
//   [ A   B ] [ M ]   [ l1 ]
//   [ B' -S ] [ u ] = [ -l2 ],   u = (theta, w, lambda),
// where A is the compliance form int (A M) : tau, B the elementwise duality
// pairing <div tau, u> (plus the multiplier coupling in hybrid mode), and S
// the shear penalty  mu/t^2 int (grad w - theta).(grad v - eta).
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "tdnns/fespace.hpp"
#include "tdnns/material.hpp"
#include "tdnns/mesh.hpp"
#include "tdnns/solver.hpp"

namespace tdnns {

/// Boundary conditions of one marker.  Three independent essential/natural
/// pairs; for each pair, at most one of (essential flag, natural datum) may
/// be active:
///  - deflection w:           essential value | natural edge force density
///  - tangential rotation:    essential value | natural tangential edge moment
///  - normal-normal moment:   essential value | natural normal rotation
/// Unset closures mean homogeneous data.
struct BoundaryCondition {
  bool essential_deflection = false;
  bool essential_rotation = false;
  bool essential_moment = false;
  std::function<double(Vec2)> deflection_value;  ///< essential w data
  std::function<Vec2(Vec2)> rotation_value;      ///< essential tangential rotation data
  std::function<double(Vec2)> moment_value;      ///< essential m_nn data
  std::function<double(Vec2)> edge_force;        ///< natural, needs w free
  std::function<Vec2(Vec2)> edge_moment;         ///< natural, needs rotation free
  std::function<double(Vec2)> edge_rotation;     ///< natural, needs m_nn free
};

/// Boundary conditions per marker.  Every marker present in the mesh must be
/// covered; a default-constructed BoundaryCondition is fully natural
/// (homogeneous "free" edge with the normal rotation weakly zero).
struct BCSpec {
  std::map<int, BoundaryCondition> markers;

  /// Checks the essential/natural exclusivity and marker coverage.
  void validate(const TriMesh& mesh) const;
};

struct PlateProblem {
  const TriMesh* mesh = nullptr;
  int order = 1;          ///< moment/rotation order k; deflection uses k+1
  bool hybrid = false;    ///< broken moments + edge multipliers
  MaterialParams material;
  double thickness = 1e-3;
  std::function<double(Vec2)> load;  ///< transverse volume load (null = 0)
  BCSpec bc;
  int threads = 1;
};

struct Spaces {
  FESpace moment, rotation, deflection, multiplier;  ///< multiplier.ndof == 0 unless hybrid
  bool hybrid = false;
};
Spaces make_spaces(const TriMesh& mesh, int order, bool hybrid);

/// Essential-dof bookkeeping of one space: flags, boundary values, and the
/// free-dof numbering (free dofs keep their relative order).
struct EssentialSet {
  std::vector<char> flag;
  std::vector<double> value;
  std::vector<int> free_index;  ///< per dof: slot among free dofs, -1 if essential
  std::vector<int> free_dofs;   ///< free slot -> dof

  int free_count() const { return static_cast<int>(free_dofs.size()); }
  /// Merges a full-length value vector from solved free values.
  std::vector<double> expand(const std::vector<double>& free_values) const;
};

EssentialSet essential_deflection(const FESpace& space, const BCSpec& bc);
EssentialSet essential_rotation(const FESpace& space, const BCSpec& bc);
EssentialSet essential_moment(const FESpace& space, const BCSpec& bc);
EssentialSet essential_multiplier(const FESpace& space, const BCSpec& bc);

/// Element contribution in local dof order.  u-dofs are the concatenation of
/// rotation, deflection and (hybrid) multiplier element dofs.
struct ElementSystem {
  std::vector<int> mdofs;  ///< global moment dofs
  std::vector<int> tdofs;  ///< global rotation dofs
  std::vector<int> wdofs;  ///< global deflection dofs
  std::vector<int> ldofs;  ///< global multiplier dofs (hybrid)
  Eigen::MatrixXd A;       ///< compliance block
  Eigen::MatrixXd B;       ///< duality (+ multiplier coupling) block, moments x u
  Eigen::MatrixXd S;       ///< shear block over u (zero multiplier rows/cols)
  Eigen::VectorXd l1;      ///< moment-equation load (natural normal rotation data)
  Eigen::VectorXd l2;      ///< u-equation load (volume + natural edge data)

  int n_u() const { return static_cast<int>(tdofs.size() + wdofs.size() + ldofs.size()); }
};
ElementSystem element_system(const PlateProblem& problem, const Spaces& spaces, int t);

/// Assembled monolithic system over free dofs, in the block layout
/// [moment | rotation | deflection | multiplier].
struct BlockSystem {
  Spaces spaces;
  EssentialSet ess_m, ess_t, ess_w, ess_l;
  int off_m = 0, off_t = 0, off_w = 0, off_l = 0, n_free = 0;
  SparseMatrix matrix;      ///< [[A, B], [B', -S]] (symmetric indefinite)
  std::vector<double> rhs;  ///< [l1; -l2]
  SparseMatrix compliance;  ///< A over free moment dofs (SPD)
  SparseMatrix duality;     ///< B: free moment x free u
  SparseMatrix shear;       ///< S over free u dofs (positive semidefinite)
};
BlockSystem assemble(const PlateProblem& problem);

/// Full-length coefficient vectors of a solved problem (essential values
/// included).  `shear` is filled by recover_shear.
struct SolutionFields {
  std::vector<double> moment;
  std::vector<double> rotation;
  std::vector<double> deflection;
  std::vector<double> multiplier;
  std::vector<double> shear;
  SolveStats stats;
  int n_free = 0;  ///< unknowns in the solved linear system
};

/// Hybrid system after element-level elimination of (broken) moments and
/// interior rotation/deflection dofs.  The remaining interface unknowns are
/// edge rotation dofs, vertex/edge deflection dofs, and multipliers; the
/// reduced matrix is symmetric positive definite.
struct CondensedSystem {
  Spaces spaces;
  EssentialSet ess_m, ess_t, ess_w, ess_l;
  /// Interface numbering over free non-interior dofs: rotation block, then
  /// deflection, then multiplier; -1 for essential or interior dofs.
  std::vector<int> iface_t, iface_w, iface_l;
  int n_interface = 0;
  SparseMatrix matrix;  ///< SPD Schur complement
  std::vector<double> rhs;

  struct ElementRecovery {
    std::vector<int> mdofs, tdofs, wdofs, ldofs;
    std::vector<int> m_free;                ///< local indices of free moment dofs
    std::vector<int> bubble, rest;          ///< local u indices: eliminated / kept
    Eigen::MatrixXd inv_a_b;                ///< A_ff^{-1} B_f
    Eigen::VectorXd inv_a_l1;               ///< A_ff^{-1} (l1_f - A_fe m_ess)
    Eigen::MatrixXd inv_kbb_kbr;            ///< Kbb^{-1} K_br
    Eigen::VectorXd inv_kbb_g;              ///< Kbb^{-1} g_b
  };
  std::vector<ElementRecovery> elements;
};
CondensedSystem condense(const PlateProblem& problem);

/// Direct dense solve of the monolithic saddle point system (Bunch-Kaufman).
/// Intended for certification at small sizes; requires <= 20000 free dofs.
SolutionFields solve_monolithic(const PlateProblem& problem);

/// Solves the condensed SPD system and recovers all eliminated fields.
SolutionFields solve_condensed(const PlateProblem& problem, const CondensedSystem& sys,
                               const SolveOptions& opts = {});
SolutionFields solve_condensed(const PlateProblem& problem, const SolveOptions& opts = {});

/// Elementwise duality pairing <div tau, eta> in the integration-by-parts
/// form  -int_T tau : eps(eta) + int_{dT} tau_nn (eta . n).
/// Shapes must be tabulated on the same element with the same rules.
double duality_product_element(const ElementShapes& tau_shapes, const ElementShapes& eta_shapes,
                               const std::vector<double>& tau_local,
                               const std::vector<double>& eta_local);
/// The same pairing in the divergence form
///   int_T div(tau) . eta - int_{dT} tau_nt (eta . t).
double duality_product_element_divform(const ElementShapes& tau_shapes,
                                       const ElementShapes& eta_shapes,
                                       const std::vector<double>& tau_local,
                                       const std::vector<double>& eta_local);

/// Discrete shear force gamma = mu/t^2 (grad w - theta), exact in the
/// rotation space because grad w lies in it.  Returns rotation coefficients.
std::vector<double> recover_shear(const PlateProblem& problem, const SolutionFields& fields);

/// Residual of the shear constitutive identity tested against every rotation
/// shape:  r_i = int (grad w - theta).delta_i - (t^2/mu) int gamma.delta_i.
struct ShearResidual {
  double residual = 0.0;  ///< max |r_i|
  double scale = 0.0;     ///< max magnitude of the two individual terms
};
ShearResidual shear_residual(const PlateProblem& problem, const SolutionFields& fields);

/// Mesh-dependent norm of a moment field: L2 part, edge normal-normal trace
/// part weighted by edge length, and a dual term
///   sup_v <div M, grad v> / |v|_H1
/// over the deflection space with the given essential constraints.
double discrete_moment_norm(const FESpace& moment, const std::vector<double>& coeffs,
                            const FESpace& deflection, const EssentialSet& deflection_ess);

}  // namespace tdnns
