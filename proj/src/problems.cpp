#include "poro/problems.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "poro/kernels.hpp"
#include "poro/matrix_market.hpp"
#include "poro/solve.hpp"

namespace poro {

void MaterialParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("MaterialParams: ") + name +
                                                    " must be strictly positive");
    };
    positive(mu, "mu");
    positive(lambda, "lambda");
    positive(alpha, "alpha");
    positive(M, "M");
    positive(kappa, "kappa");
    positive(nu, "nu");
}

namespace fem {

StructuredMesh2D::StructuredMesh2D(Index n_) : n(n_) {
    if (n < 1) throw std::invalid_argument("StructuredMesh2D: n must be >= 1");
    triangles.reserve(static_cast<size_t>(triangle_count()));
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            const Index a = node_index(i, j);
            const Index b = node_index(i + 1, j);
            const Index c = node_index(i + 1, j + 1);
            const Index d = node_index(i, j + 1);
            triangles.push_back({a, b, c});  // lower-right triangle
            triangles.push_back({a, c, d});  // upper-left triangle
        }
}

namespace {

struct TriangleGeometry {
    double area;
    std::array<std::array<double, 2>, 3> grad;  // gradients of the three P1 hats
    std::array<std::array<double, 2>, 3> vertex;
};

TriangleGeometry geometry(const StructuredMesh2D& mesh, const std::array<Index, 3>& tri) {
    TriangleGeometry g;
    for (int v = 0; v < 3; ++v) g.vertex[v] = mesh.node_coords(tri[v]);
    const auto& p0 = g.vertex[0];
    const auto& p1 = g.vertex[1];
    const auto& p2 = g.vertex[2];
    const double twice_area =
        (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    g.area = 0.5 * twice_area;
    g.grad[0] = {(p1[1] - p2[1]) / twice_area, (p2[0] - p1[0]) / twice_area};
    g.grad[1] = {(p2[1] - p0[1]) / twice_area, (p0[0] - p2[0]) / twice_area};
    g.grad[2] = {(p0[1] - p1[1]) / twice_area, (p1[0] - p0[0]) / twice_area};
    return g;
}

}  // namespace

DenseMatrix pressure_mass(const StructuredMesh2D& mesh) {
    DenseMatrix m(mesh.node_count(), mesh.node_count());
    for (const auto& tri : mesh.triangles) {
        const TriangleGeometry g = geometry(mesh, tri);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                m(tri[static_cast<size_t>(a)], tri[static_cast<size_t>(b)]) +=
                    g.area / 12.0 * (a == b ? 2.0 : 1.0);
    }
    return m;
}

DenseMatrix pressure_stiffness(const StructuredMesh2D& mesh) {
    DenseMatrix m(mesh.node_count(), mesh.node_count());
    for (const auto& tri : mesh.triangles) {
        const TriangleGeometry g = geometry(mesh, tri);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                m(tri[static_cast<size_t>(a)], tri[static_cast<size_t>(b)]) +=
                    g.area * (g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1]);
    }
    return m;
}

Vector nodal_areas(const StructuredMesh2D& mesh) {
    Vector v(mesh.node_count());
    for (const auto& tri : mesh.triangles) {
        const TriangleGeometry g = geometry(mesh, tri);
        for (int a = 0; a < 3; ++a) v[tri[static_cast<size_t>(a)]] += g.area / 3.0;
    }
    return v;
}

std::vector<Index> interior_nodes(const StructuredMesh2D& mesh) {
    std::vector<Index> nodes;
    for (Index node = 0; node < mesh.node_count(); ++node)
        if (!mesh.boundary_node(node)) nodes.push_back(node);
    return nodes;
}

DenseMatrix elasticity(const StructuredMesh2D& mesh, double mu, double lambda) {
    const std::vector<Index> interior = interior_nodes(mesh);
    std::vector<Index> dof_of_node(static_cast<size_t>(mesh.node_count()), -1);
    for (size_t k = 0; k < interior.size(); ++k)
        dof_of_node[static_cast<size_t>(interior[k])] = static_cast<Index>(k);

    DenseMatrix m(2 * static_cast<Index>(interior.size()), 2 * static_cast<Index>(interior.size()));
    for (const auto& tri : mesh.triangles) {
        const TriangleGeometry g = geometry(mesh, tri);
        for (int a = 0; a < 3; ++a) {
            const Index ia = dof_of_node[static_cast<size_t>(tri[static_cast<size_t>(a)])];
            if (ia < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const Index ib = dof_of_node[static_cast<size_t>(tri[static_cast<size_t>(b)])];
                if (ib < 0) continue;
                const double gax = g.grad[a][0], gay = g.grad[a][1];
                const double gbx = g.grad[b][0], gby = g.grad[b][1];
                // eps(phi_a e_x):eps(phi_b e_x) etc., plus the div-div term.
                const double exx = gax * gbx + 0.5 * gay * gby;
                const double exy = 0.5 * gay * gbx;
                const double eyx = 0.5 * gax * gby;
                const double eyy = gay * gby + 0.5 * gax * gbx;
                m(2 * ia, 2 * ib) += g.area * (2.0 * mu * exx + lambda * gax * gbx);
                m(2 * ia, 2 * ib + 1) += g.area * (2.0 * mu * exy + lambda * gax * gby);
                m(2 * ia + 1, 2 * ib) += g.area * (2.0 * mu * eyx + lambda * gay * gbx);
                m(2 * ia + 1, 2 * ib + 1) += g.area * (2.0 * mu * eyy + lambda * gay * gby);
            }
        }
    }
    return m;
}

DenseMatrix coupling_divergence(const StructuredMesh2D& mesh) {
    const std::vector<Index> interior = interior_nodes(mesh);
    std::vector<Index> dof_of_node(static_cast<size_t>(mesh.node_count()), -1);
    for (size_t k = 0; k < interior.size(); ++k)
        dof_of_node[static_cast<size_t>(interior[k])] = static_cast<Index>(k);

    DenseMatrix m(mesh.node_count(), 2 * static_cast<Index>(interior.size()));
    for (const auto& tri : mesh.triangles) {
        const TriangleGeometry g = geometry(mesh, tri);
        for (int q = 0; q < 3; ++q) {
            const Index row = tri[static_cast<size_t>(q)];
            for (int b = 0; b < 3; ++b) {
                const Index ib = dof_of_node[static_cast<size_t>(tri[static_cast<size_t>(b)])];
                if (ib < 0) continue;
                // \int phi_q div(phi_b e_dir) = area/3 * grad(phi_b)[dir]
                m(row, 2 * ib) += g.area / 3.0 * g.grad[b][0];
                m(row, 2 * ib + 1) += g.area / 3.0 * g.grad[b][1];
            }
        }
    }
    return m;
}

Vector scalar_load(const StructuredMesh2D& mesh, const std::function<double(double, double)>& field) {
    Vector v(mesh.node_count());
    for (const auto& tri : mesh.triangles) {
        const TriangleGeometry g = geometry(mesh, tri);
        // Edge midpoints; hat a vanishes on the opposite edge (midpoint index a).
        std::array<std::array<double, 2>, 3> mid;
        for (int e = 0; e < 3; ++e) {
            const auto& p1 = g.vertex[(e + 1) % 3];
            const auto& p2 = g.vertex[(e + 2) % 3];
            mid[e] = {0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])};
        }
        for (int a = 0; a < 3; ++a) {
            double s = 0.0;
            for (int e = 0; e < 3; ++e)
                if (e != a) s += field(mid[e][0], mid[e][1]) * 0.5;
            v[tri[static_cast<size_t>(a)]] += g.area / 3.0 * s;
        }
    }
    return v;
}

double bubble(double x, double y) { return x * y * (1.0 - x) * (1.0 - y); }

void export_mesh_csv(const StructuredMesh2D& mesh, const std::filesystem::path& nodes_csv,
                     const std::filesystem::path& elements_csv) {
    std::ofstream nodes(nodes_csv);
    if (!nodes) throw std::runtime_error("cannot write " + nodes_csv.string());
    nodes << "node,x,y\n";
    for (Index i = 0; i < mesh.node_count(); ++i) {
        const auto c = mesh.node_coords(i);
        nodes << i << "," << c[0] << "," << c[1] << "\n";
    }
    std::ofstream elems(elements_csv);
    if (!elems) throw std::runtime_error("cannot write " + elements_csv.string());
    elems << "element,n0,n1,n2\n";
    for (size_t t = 0; t < mesh.triangles.size(); ++t)
        elems << t << "," << mesh.triangles[t][0] << "," << mesh.triangles[t][1] << ","
              << mesh.triangles[t][2] << "\n";
}

}  // namespace fem

PoroSystem model_problem(double omega_tilde) {
    if (!(omega_tilde > 0.0)) throw std::invalid_argument("model_problem: omega must be positive");
    const double scale = 1.0 / (2.0 - std::sqrt(2.0));
    DenseMatrix a(3, 3);
    a(0, 0) = a(1, 1) = a(2, 2) = 2.0 * scale;
    a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = -scale;
    DenseMatrix b(1, 1), c(1, 1);
    b(0, 0) = 1.0;
    c(0, 0) = 1.0;
    DenseMatrix d(1, 3);
    const double root_omega = std::sqrt(omega_tilde);
    d(0, 0) = root_omega * 2.0 / 3.0;
    d(0, 1) = root_omega * 1.0 / 3.0;
    d(0, 2) = root_omega * 2.0 / 3.0;
    auto f = [](double) { return Vector{1.0, 1.0, 1.0}; };
    auto g = [](double t) { return Vector{std::sin(t)}; };
    return PoroSystem(std::move(a), std::move(b), std::move(c), std::move(d), f, g);
}

State model_problem_initial(const PoroSystem& sys) {
    State s;
    s.t = 0.0;
    s.p = Vector{1.0};
    Vector rhs = sys.f(0.0);
    Vector dtp = kernels::matvec_transposed(sys.D(), s.p);
    kernels::axpy(1.0, dtp.span(), rhs.span());
    s.u = solve_spd(sys.A(), rhs);
    return s;
}

namespace {

struct UnitSquareParts {
    DenseMatrix A, B, C, D_unit;  // D at alpha = 1
    Vector f_load;                // bubble load on displacement dofs
    Vector g_load;                // nodal areas on pressure dofs
};

/// Assemble the alpha-independent pieces; the pressure space drops the pinned
/// corner node (0,0) to keep B positive definite under natural boundaries.
UnitSquareParts unit_square_parts(Index n, const MaterialParams& mat) {
    const fem::StructuredMesh2D mesh(n);
    const Index pin = 0;

    UnitSquareParts parts;
    parts.A = fem::elasticity(mesh, mat.mu, mat.lambda);

    const DenseMatrix b_full = fem::pressure_stiffness(mesh);
    const DenseMatrix c_full = fem::pressure_mass(mesh);
    const DenseMatrix d_full = fem::coupling_divergence(mesh);
    const Vector areas = fem::nodal_areas(mesh);

    const Index np = mesh.node_count() - 1;
    parts.B = DenseMatrix(np, np);
    parts.C = DenseMatrix(np, np);
    parts.D_unit = DenseMatrix(np, parts.A.rows());
    parts.g_load = Vector(np);
    auto pdof = [pin](Index node) { return node > pin ? node - 1 : node; };
    for (Index i = 0; i < mesh.node_count(); ++i) {
        if (i == pin) continue;
        for (Index j = 0; j < mesh.node_count(); ++j) {
            if (j == pin) continue;
            parts.B(pdof(i), pdof(j)) = (mat.kappa / mat.nu) * b_full(i, j);
            parts.C(pdof(i), pdof(j)) = (1.0 / mat.M) * c_full(i, j);
        }
        for (Index j = 0; j < parts.A.rows(); ++j) parts.D_unit(pdof(i), j) = d_full(i, j);
        parts.g_load[pdof(i)] = areas[i];
    }

    const Vector load = fem::scalar_load(mesh, fem::bubble);
    const std::vector<Index> interior = fem::interior_nodes(mesh);
    parts.f_load = Vector(parts.A.rows());
    for (size_t k = 0; k < interior.size(); ++k) {
        parts.f_load[2 * static_cast<Index>(k)] = load[interior[k]];
        parts.f_load[2 * static_cast<Index>(k) + 1] = load[interior[k]];
    }
    return parts;
}

PoroSystem assemble_unit_square(const UnitSquareParts& parts, double alpha) {
    DenseMatrix d = parts.D_unit;
    for (Index i = 0; i < d.rows(); ++i)
        for (Index j = 0; j < d.cols(); ++j) d(i, j) *= alpha;
    const Vector f_load = parts.f_load;
    const Vector g_load = parts.g_load;
    auto f = [f_load](double) { return f_load; };
    auto g = [g_load](double t) { return kernels::scaled(g_load, std::sin(t)); };
    // Equal-order P1/P1 carries spurious pressure modes: the coupling block is
    // rank deficient on this mesh family, so construction runs relaxed. The
    // deficiency is reported through coupling_rank_defect(); none of the
    // splitting schemes require the full-rank property.
    return PoroSystem(parts.A, parts.B, parts.C, std::move(d), f, g, Validation::relaxed);
}

}  // namespace

PoroSystem unit_square_problem(double omega, Index n) {
    if (!(omega > 0.0)) throw std::invalid_argument("unit_square_problem: omega must be positive");
    if (n < 4) throw std::invalid_argument("unit_square_problem: n must be >= 4");
    MaterialParams mat;
    mat.alpha = std::sqrt(omega);
    mat.validate();
    return assemble_unit_square(unit_square_parts(n, mat), mat.alpha);
}

State unit_square_initial(const PoroSystem& sys) { return solve_static(sys, 0.0); }

ProblemFamily model_problem_family() {
    ProblemFamily family;
    family.name = "model";
    family.make = [](double omega) { return model_problem(omega); };
    family.initial = [](const PoroSystem& sys) { return model_problem_initial(sys); };
    return family;
}

ProblemFamily unit_square_family(Index n) {
    MaterialParams mat;  // alpha overridden per parameter value
    auto parts = std::make_shared<UnitSquareParts>(unit_square_parts(n, mat));
    ProblemFamily family;
    family.name = "unit_square_n" + std::to_string(n);
    family.make = [parts](double omega) {
        if (!(omega > 0.0)) throw std::invalid_argument("unit_square family: omega must be positive");
        return assemble_unit_square(*parts, std::sqrt(omega));
    };
    family.initial = [](const PoroSystem& sys) { return unit_square_initial(sys); };
    return family;
}

PoroSystem::RhsFn make_rhs(const RhsSpec& spec, Index dim) {
    switch (spec.kind) {
        case RhsSpec::Kind::zero:
            return [dim](double) { return Vector(dim); };
        case RhsSpec::Kind::constant: {
            if (spec.base.size() != dim) throw std::invalid_argument("rhs: constant vector has wrong size");
            Vector base = spec.base;
            return [base](double) { return base; };
        }
        case RhsSpec::Kind::sin_scaled: {
            if (spec.base.size() != dim) throw std::invalid_argument("rhs: sin vector has wrong size");
            Vector base = spec.base;
            return [base](double t) { return kernels::scaled(base, std::sin(t)); };
        }
        case RhsSpec::Kind::bubble: {
            if (spec.bubble_n < 1) throw std::invalid_argument("rhs: bubble selector needs n >= 1");
            const fem::StructuredMesh2D mesh(spec.bubble_n);
            const Vector load = fem::scalar_load(mesh, fem::bubble);
            const std::vector<Index> interior = fem::interior_nodes(mesh);
            Vector full(2 * static_cast<Index>(interior.size()));
            for (size_t k = 0; k < interior.size(); ++k) {
                full[2 * static_cast<Index>(k)] = load[interior[k]];
                full[2 * static_cast<Index>(k) + 1] = load[interior[k]];
            }
            if (full.size() != dim)
                throw std::invalid_argument("rhs: bubble load does not match system dimension");
            return [full](double) { return full; };
        }
    }
    throw std::logic_error("make_rhs: unknown selector");
}

namespace {

std::string rhs_kind_name(RhsSpec::Kind k) {
    switch (k) {
        case RhsSpec::Kind::zero: return "zero";
        case RhsSpec::Kind::constant: return "constant";
        case RhsSpec::Kind::sin_scaled: return "sin";
        case RhsSpec::Kind::bubble: return "bubble";
    }
    throw std::logic_error("rhs_kind_name");
}

RhsSpec::Kind parse_rhs_kind(const std::string& name) {
    if (name == "zero") return RhsSpec::Kind::zero;
    if (name == "constant") return RhsSpec::Kind::constant;
    if (name == "sin") return RhsSpec::Kind::sin_scaled;
    if (name == "bubble") return RhsSpec::Kind::bubble;
    throw std::runtime_error("rhs descriptor: unknown selector '" + name + "'");
}

}  // namespace

void save_system(const std::filesystem::path& dir, const PoroSystem& sys, const RhsSpec& f,
                 const RhsSpec& g) {
    std::filesystem::create_directories(dir);
    mm::write_dense(dir / "A.mtx", sys.A());
    mm::write_dense(dir / "B.mtx", sys.B());
    mm::write_dense(dir / "C.mtx", sys.C());
    mm::write_dense(dir / "D.mtx", sys.D());
    std::ofstream rhs(dir / "rhs.txt");
    if (!rhs) throw std::runtime_error("cannot write " + (dir / "rhs.txt").string());
    rhs << "# right-hand-side selectors\n";
    for (const auto& [name, spec] : {std::pair{"f", &f}, std::pair{"g", &g}}) {
        rhs << name << " = " << rhs_kind_name(spec->kind) << "\n";
        if (spec->kind == RhsSpec::Kind::constant || spec->kind == RhsSpec::Kind::sin_scaled) {
            const std::string file = std::string(name) + "0.mtx";
            mm::write_vector(dir / file, spec->base);
            rhs << name << ".file = " << file << "\n";
        } else if (spec->kind == RhsSpec::Kind::bubble) {
            rhs << name << ".n = " << spec->bubble_n << "\n";
        }
    }
}

PoroSystem load_external_system(const std::filesystem::path& dir) {
    for (const char* file : {"A.mtx", "B.mtx", "C.mtx", "D.mtx", "rhs.txt"})
        if (!std::filesystem::exists(dir / file))
            throw std::runtime_error("load_external_system: missing " + (dir / file).string());

    DenseMatrix a = mm::read_dense(dir / "A.mtx");
    DenseMatrix b = mm::read_dense(dir / "B.mtx");
    DenseMatrix c = mm::read_dense(dir / "C.mtx");
    DenseMatrix d = mm::read_dense(dir / "D.mtx");

    std::map<std::string, std::string> kv;
    std::ifstream rhs(dir / "rhs.txt");
    std::string line;
    while (std::getline(rhs, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b2 = s.find_first_not_of(" \t\r");
            const auto e2 = s.find_last_not_of(" \t\r");
            return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto read_spec = [&](const std::string& name) {
        auto it = kv.find(name);
        if (it == kv.end()) throw std::runtime_error("rhs descriptor: missing selector '" + name + "'");
        RhsSpec spec;
        spec.kind = parse_rhs_kind(it->second);
        if (spec.kind == RhsSpec::Kind::constant || spec.kind == RhsSpec::Kind::sin_scaled) {
            auto file = kv.find(name + ".file");
            if (file == kv.end())
                throw std::runtime_error("rhs descriptor: selector '" + name + "' needs a file");
            spec.base = mm::read_vector(dir / file->second);
        } else if (spec.kind == RhsSpec::Kind::bubble) {
            auto nval = kv.find(name + ".n");
            if (nval == kv.end())
                throw std::runtime_error("rhs descriptor: bubble selector needs '" + name + ".n'");
            spec.bubble_n = std::stoll(nval->second);
        }
        return spec;
    };
    const RhsSpec f_spec = read_spec("f");
    const RhsSpec g_spec = read_spec("g");
    const Index nu = a.rows(), np = b.rows();

    try {
        return PoroSystem(std::move(a), std::move(b), std::move(c), std::move(d),
                          make_rhs(f_spec, nu), make_rhs(g_spec, np));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("load_external_system: " + dir.string() +
                                 " violates the structural assumptions: " + e.what());
    }
}

}  // namespace poro
