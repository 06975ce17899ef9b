#pragma once

#include <array>
#include <filesystem>

#include "poro/spectral.hpp"
#include "poro/system.hpp"

namespace poro {

/// Biot material constants. The physical range of the Biot-Willis coefficient
/// is (0, 1]; the stability scans deliberately drive alpha = sqrt(omega)
/// beyond it, so only positivity is enforced here.
struct MaterialParams {
    double mu = 0.5;      // Lame shear modulus
    double lambda = 0.5;  // Lame first parameter
    double alpha = 1.0;   // Biot-Willis coupling
    double M = 1.0;       // Biot modulus
    double kappa = 1.0;   // permeability
    double nu = 1.0;      // fluid viscosity

    void validate() const;
};

namespace fem {

/// Uniform triangulation of the unit square: n cells per side, two triangles
/// per cell split along the lower-left to upper-right diagonal. Node (i, j)
/// has index j*(n+1)+i and coordinates (i/n, j/n). Orientation and ordering
/// are fixed so assembled matrices are bit-reproducible.
struct StructuredMesh2D {
    explicit StructuredMesh2D(Index n);

    Index n = 0;
    Index node_count() const { return (n + 1) * (n + 1); }
    Index triangle_count() const { return 2 * n * n; }
    double h() const { return 1.0 / static_cast<double>(n); }

    Index node_index(Index i, Index j) const { return j * (n + 1) + i; }
    std::array<double, 2> node_coords(Index node) const {
        return {static_cast<double>(node % (n + 1)) * h(), static_cast<double>(node / (n + 1)) * h()};
    }
    bool boundary_node(Index node) const {
        const Index i = node % (n + 1), j = node / (n + 1);
        return i == 0 || j == 0 || i == n || j == n;
    }

    std::vector<std::array<Index, 3>> triangles;  // ccw vertex indices
};

// Assembly on the full node set (no boundary conditions applied).
DenseMatrix pressure_mass(const StructuredMesh2D& mesh);        // \int p q
DenseMatrix pressure_stiffness(const StructuredMesh2D& mesh);   // \int grad p . grad q
Vector nodal_areas(const StructuredMesh2D& mesh);               // \int phi_i

/// Elasticity 2 mu \int eps(u):eps(v) + lambda \int div u div v on the
/// interior displacement dofs (homogeneous Dirichlet on the whole boundary);
/// dof 2k / 2k+1 are the x / y components of the k-th interior node.
DenseMatrix elasticity(const StructuredMesh2D& mesh, double mu, double lambda);

/// Coupling \int q div v: full pressure nodes x interior displacement dofs.
DenseMatrix coupling_divergence(const StructuredMesh2D& mesh);

/// Load vector of a scalar field against the P1 basis, 3-point edge-midpoint
/// rule (exact to degree 2).
Vector scalar_load(const StructuredMesh2D& mesh, const std::function<double(double, double)>& field);

/// The product bubble x y (1-x) (1-y).
double bubble(double x, double y);

std::vector<Index> interior_nodes(const StructuredMesh2D& mesh);

void export_mesh_csv(const StructuredMesh2D& mesh, const std::filesystem::path& nodes_csv,
                     const std::filesystem::path& elements_csv);

}  // namespace fem

/// 3x3 benchmark system: A = tridiag(-1,2,-1)/(2-sqrt(2)), B = C = 1,
/// D = sqrt(omega_tilde)/3 * [2 1 2], f == [1 1 1]^T, g(t) = sin(t).
/// Normalized so c_A = c_C = 1 and C_D = sqrt(omega_tilde).
PoroSystem model_problem(double omega_tilde);

/// Canonical initial data of the model problem: p0 = 1, u0 consistent.
State model_problem_initial(const PoroSystem& sys);

/// P1/P1 discretization of the unit-square benchmark: material constants
/// M = kappa = nu = 1, mu = lambda = 1/2, alpha = sqrt(omega); body load
/// x y (1-x) (1-y) on both displacement components, g(t) = sin(t).
/// Displacement: homogeneous Dirichlet on the whole boundary. Pressure:
/// natural (Neumann) boundary with the (0,0) corner node pinned so B stays
/// positive definite.
PoroSystem unit_square_problem(double omega, Index n);

/// Static initial data (B p = g(0), then the constraint) for the unit square.
State unit_square_initial(const PoroSystem& sys);

/// One-parameter families for the stability sweeps.
ProblemFamily model_problem_family();
ProblemFamily unit_square_family(Index n);

/// Right-hand-side selectors from the fixed catalog understood by the
/// system directory format.
struct RhsSpec {
    enum class Kind { zero, constant, sin_scaled, bubble };
    Kind kind = Kind::zero;
    Vector base;        // constant / sin_scaled payload
    Index bubble_n = 0; // mesh resolution regenerating the bubble load

    static RhsSpec zero() { return {}; }
    static RhsSpec constant(Vector v) { return {Kind::constant, std::move(v), 0}; }
    static RhsSpec sin_scaled(Vector v) { return {Kind::sin_scaled, std::move(v), 0}; }
};

PoroSystem::RhsFn make_rhs(const RhsSpec& spec, Index dim);

/// Directory layout: A.mtx, B.mtx, C.mtx, D.mtx plus rhs.txt declaring the
/// f/g selectors (`f = constant`, `f.file = f0.mtx`, ...).
void save_system(const std::filesystem::path& dir, const PoroSystem& sys, const RhsSpec& f,
                 const RhsSpec& g);
PoroSystem load_external_system(const std::filesystem::path& dir);

}  // namespace poro
