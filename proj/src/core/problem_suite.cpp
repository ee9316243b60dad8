#include "fbfp/problem_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "fbfp/errors.hpp"
#include "fbfp/json_io.hpp"

namespace fbfp {

namespace {

using Rng = std::mt19937_64;

Matrix gaussian(Rng& rng, Index r, Index c) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) m(i, j) = g(rng);
    return m;
}

Vector gaussian(Rng& rng, Index n) { return gaussian(rng, n, 1).col(0); }

Matrix orthonormal_columns(Rng& rng, Index rows, Index cols) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(rng, rows, cols));
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

// rank x d with singular values in [0.5, 1], the largest exactly 1, so the
// rows are independent and ||L|| = 1.
Matrix well_conditioned_map(Rng& rng, Index rank, Index d) {
    std::uniform_real_distribution<double> u(0.5, 1.0);
    const Matrix U = orthonormal_columns(rng, rank, rank);
    const Matrix V = orthonormal_columns(rng, d, rank);
    Vector s(rank);
    for (Index i = 0; i < rank; ++i) s[i] = u(rng);
    s[0] = 1.0;
    return U * s.asDiagonal() * V.transpose();
}

Matrix kernel_projector(const Matrix& L) {
    const Index d = L.cols();
    const Matrix G = L * L.transpose();
    Eigen::LLT<Matrix> llt(G);
    if (llt.info() != Eigen::Success) throw OracleFailure("projection oracle: L L^T is singular");
    return Matrix::Identity(d, d) - L.transpose() * llt.solve(L);
}

Vector project_simplex(const Vector& v) {
    Vector s = v;
    std::sort(s.data(), s.data() + s.size(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (Index i = 0; i < s.size(); ++i) {
        cum += s[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (s[i] - t > 0.0) theta = t;
    }
    return (v.array() - theta).max(0.0);
}

nlohmann::json half_sq_json(const Matrix& L) { return {{"kind", "half_sq_linmap"}, {"L", to_json(L)}}; }

ProblemInstance finish(std::string id, nlohmann::json desc, std::set<std::string> tags) {
    ProblemInstance inst;
    inst.id = std::move(id);
    inst.problem = min_problem_from_json(desc);
    inst.description = std::move(desc);
    inst.regime_tags = std::move(tags);
    return inst;
}

}  // namespace

const MinimizationProblem& ProblemInstance::minimization() const {
    if (const auto* p = std::get_if<MinimizationProblem>(&problem)) return *p;
    throw InvalidInput("instance '" + id + "' is not a minimization problem");
}

double distance_to_hull(const Vector& x, const std::vector<Vector>& V) {
    if (V.empty()) throw InvalidInput("distance_to_hull: no vertices");
    if (V.size() == 1) return (x - V[0]).norm();
    const std::size_t k = V.size();
    if (k <= 12) {
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
            std::vector<std::size_t> S;
            for (std::size_t i = 0; i < k; ++i)
                if (mask & (1u << i)) S.push_back(i);
            if (S.size() > static_cast<std::size_t>(x.size()) + 1) continue;
            const Vector& v0 = V[S[0]];
            if (S.size() == 1) {
                best = std::min(best, (x - v0).norm());
                continue;
            }
            Matrix Dm(x.size(), static_cast<Index>(S.size() - 1));
            for (std::size_t j = 1; j < S.size(); ++j) Dm.col(static_cast<Index>(j - 1)) = V[S[j]] - v0;
            const Vector th = Dm.completeOrthogonalDecomposition().solve(Vector(x - v0));
            if (th.minCoeff() < -1e-12 || th.sum() > 1.0 + 1e-12) continue;
            best = std::min(best, (x - v0 - Dm * th).norm());
        }
        return best;
    }
    // Projected gradient over the simplex of weights.
    Matrix Vm(x.size(), static_cast<Index>(k));
    for (std::size_t i = 0; i < k; ++i) Vm.col(static_cast<Index>(i)) = V[i];
    const double Lg = std::max(1e-300, Vm.squaredNorm());
    Vector th = Vector::Constant(static_cast<Index>(k), 1.0 / static_cast<double>(k));
    for (int it = 0; it < 200000; ++it) {
        const Vector g = Vm.transpose() * (Vm * th - x);
        const Vector nt = project_simplex(th - g / Lg);
        const double ch = (nt - th).norm();
        th = nt;
        if (ch < 1e-15) break;
    }
    return (Vm * th - x).norm();
}

double ProblemInstance::distance_to_solution_set(const Vector& x) const {
    if (!solution_vertices.empty()) return distance_to_hull(x, solution_vertices);
    if (oracle_solution) return (x - *oracle_solution).norm();
    throw InvalidInput("instance '" + id + "' has no oracle");
}

MinimizationProblem min_problem_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw InvalidInput("problem: expected an object");
    if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long>() < 1) {
        throw InvalidInput("problem/dim: expected a positive integer");
    }
    MinimizationProblem p;
    p.dim = doc["dim"].get<Index>();
    if (!doc.contains("f")) throw InvalidInput("problem/f: missing");
    try {
        p.f = prox_catalog_lookup(doc["f"]);
    } catch (const InvalidInput& e) {
        throw InvalidInput(std::string("problem/f: ") + e.what());
    }
    if (doc.contains("h") && !doc["h"].is_null()) {
        const auto& h = doc["h"];
        if (!h.is_object() || h.value("kind", "") != "quadratic") {
            throw InvalidInput("problem/h: expected {\"kind\": \"quadratic\", ...}");
        }
        if (!h.contains("Q")) throw InvalidInput("problem/h/Q: missing");
        Vector b = h.contains("b") ? vector_from_json(h["b"], "problem/h/b") : Vector{};
        p.h = make_quadratic_smooth(matrix_from_json(h["Q"], "problem/h/Q"), b);
        if (p.h->gradient.dim() != p.dim) throw InvalidInput("problem/h/Q: dimension does not match dim");
    }
    if (doc.contains("blocks")) {
        if (!doc["blocks"].is_array()) throw InvalidInput("problem/blocks: expected an array");
        for (std::size_t i = 0; i < doc["blocks"].size(); ++i) {
            const auto& b = doc["blocks"][i];
            const std::string at = "problem/blocks/" + std::to_string(i);
            if (!b.is_object() || !b.contains("g") || !b.contains("L")) throw InvalidInput(at + ": needs g and L");
            if (!b.contains("nu") || !b["nu"].is_number()) throw InvalidInput(at + "/nu: expected a number");
            const Matrix L = matrix_from_json(b["L"], at + "/L");
            if (L.cols() != p.dim) throw InvalidInput(at + "/L: expected " + std::to_string(p.dim) + " columns");
            try {
                p.blocks.push_back(moreau_block(prox_catalog_lookup(b["g"]), LinearMap(L), b["nu"].get<double>()));
            } catch (const InvalidInput& e) {
                throw InvalidInput(at + ": " + e.what());
            }
        }
    }
    const nlohmann::json psi = doc.value("psi", nlohmann::json{{"kind", "zero"}});
    const std::string kind = psi.is_object() ? psi.value("kind", "") : "";
    if (kind == "half_sq_linmap") {
        if (!psi.contains("L")) throw InvalidInput("problem/psi/L: missing");
        const Matrix L = matrix_from_json(psi["L"], "problem/psi/L");
        if (L.cols() != p.dim) throw InvalidInput("problem/psi/L: expected " + std::to_string(p.dim) + " columns");
        p.psi = half_sq_linmap(LinearMap(L));
    } else if (kind == "zero") {
        p.psi = zero_penalty(p.dim);
    } else {
        throw InvalidInput("problem/psi/kind: expected half_sq_linmap or zero");
    }
    p.validate();
    return p;
}

ProblemInstance projection_problem(const Matrix& L, const Vector& c, std::string id) {
    if (L.cols() != c.size()) throw InvalidInput("projection problem: L and c disagree on dimension");
    nlohmann::json desc = {{"dim", c.size()},
                           {"f", {{"name", "squared_l2"}, {"center", to_json(c)}}},
                           {"psi", half_sq_json(L)}};
    auto inst = finish(std::move(id), std::move(desc), {"strongly_monotone", "penalty_active"});
    inst.oracle_solution = kernel_projector(L) * c;
    inst.oracle_method = "closed-form projection P = I - L^T (L L^T)^{-1} L applied to c";
    return inst;
}

ProblemInstance gen_projection_problem(Index d, Index rank, std::uint64_t seed) {
    if (!(rank >= 1 && rank < d)) throw InvalidInput("gen_projection_problem: need 1 <= rank < d");
    Rng rng(seed);
    const Matrix L = well_conditioned_map(rng, rank, d);
    const Vector c = gaussian(rng, d);
    return projection_problem(L, c,
                              "projection_d" + std::to_string(d) + "_r" + std::to_string(rank) + "_s" + std::to_string(seed));
}

ProblemInstance l1_constrained_problem(const Matrix& L, const Vector& c, std::string id) {
    const Index d = c.size();
    if (L.cols() != d) throw InvalidInput("l1 problem: L and c disagree on dimension");
    if (d > 16) throw OracleFailure("l1 problem: vertex enumeration supports d <= 16");
    nlohmann::json f = {{"name", "scaled_translate"},
                        {"base", {{"name", "l1_norm"}, {"weight", 1.0}}},
                        {"weight", 1.0},
                        {"scale", 1.0},
                        {"shift", to_json(Vector(-c))}};
    nlohmann::json desc = {{"dim", d}, {"f", f}, {"psi", half_sq_json(L)}};
    auto inst = finish(std::move(id), std::move(desc), {"ergodic_only", "penalty_active"});

    // Feasible set ker L = {N y}. The objective sum_j |N_j y - c_j| is piecewise
    // linear, so its minimizers form a polytope whose vertices are points where
    // k = dim ker L independent pieces vanish.
    Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
    const double tol = 1e-12 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
    Index r = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol) ++r;
    const Index k = d - r;
    std::vector<Vector> cand;
    std::vector<double> vals;
    if (k == 0) {
        cand.push_back(Vector::Zero(d));
        vals.push_back(c.lpNorm<1>());
    } else {
        const Matrix N = svd.matrixV().rightCols(k);
        std::vector<int> sel(static_cast<std::size_t>(d), 0);
        std::fill(sel.end() - k, sel.end(), 1);
        do {
            Matrix NZ(k, k);
            Vector cZ(k);
            Index row = 0;
            for (Index j = 0; j < d; ++j) {
                if (sel[static_cast<std::size_t>(j)]) {
                    NZ.row(row) = N.row(j);
                    cZ[row] = c[j];
                    ++row;
                }
            }
            Eigen::FullPivLU<Matrix> lu(NZ);
            lu.setThreshold(1e-10);
            if (lu.rank() < k) continue;
            const Vector x = N * lu.solve(cZ);
            cand.push_back(x);
            vals.push_back((x - c).lpNorm<1>());
        } while (std::next_permutation(sel.begin(), sel.end()));
    }
    if (cand.empty()) throw OracleFailure("l1 oracle: no vertex found");
    const double best = *std::min_element(vals.begin(), vals.end());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (vals[i] > best + 1e-10 * (1.0 + best)) continue;
        const bool dup = std::any_of(inst.solution_vertices.begin(), inst.solution_vertices.end(),
                                     [&](const Vector& v) { return (v - cand[i]).norm() <= 1e-10; });
        if (!dup) inst.solution_vertices.push_back(cand[i]);
    }
    Vector centroid = Vector::Zero(d);
    for (const auto& v : inst.solution_vertices) centroid += v;
    inst.oracle_solution = centroid / static_cast<double>(inst.solution_vertices.size());
    inst.oracle_method = "exact vertex enumeration of the optimal face over ker L (" +
                         std::to_string(inst.solution_vertices.size()) + " optimal vertices)";
    return inst;
}

ProblemInstance gen_l1_constrained_problem(Index d, Index rank, std::uint64_t seed) {
    if (!(rank >= 1 && rank <= d)) throw InvalidInput("gen_l1_constrained_problem: need 1 <= rank <= d");
    Rng rng(seed);
    const Matrix L = well_conditioned_map(rng, rank, d);
    const Vector c = gaussian(rng, d);
    return l1_constrained_problem(L, c,
                                  "l1_d" + std::to_string(d) + "_r" + std::to_string(rank) + "_s" + std::to_string(seed));
}

ProblemInstance gen_composite_problem(Index d, Index m, std::uint64_t seed, bool strongly_convex_duals) {
    if (m < 1) throw InvalidInput("gen_composite_problem: need m >= 1");
    if (d < 2) throw InvalidInput("gen_composite_problem: need d >= 2");
    Rng rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const Matrix Vf = orthonormal_columns(rng, d, d);
    Vector qf(d);
    for (Index i = 0; i < d; ++i) qf[i] = 1.0 + uni(rng);
    const Matrix Q = Vf * qf.asDiagonal() * Vf.transpose();
    const Vector bf = gaussian(rng, d);

    const Matrix Vh = orthonormal_columns(rng, d, d);
    Vector qh(d);
    for (Index i = 0; i < d; ++i) qh[i] = 0.5 * uni(rng);
    const Matrix H = Vh * qh.asDiagonal() * Vh.transpose();
    const Vector bh = 0.5 * gaussian(rng, d);

    const Index di = std::max<Index>(2, d / 2);
    nlohmann::json blocks = nlohmann::json::array();
    std::vector<Matrix> Ls;
    std::vector<Vector> centers;
    for (Index i = 0; i < m; ++i) {
        Matrix Li = well_conditioned_map(rng, std::min(di, d), d);
        Ls.push_back(Li);
        nlohmann::json g;
        if (strongly_convex_duals) {
            centers.push_back(gaussian(rng, di));
            g = {{"name", "squared_l2"}, {"center", to_json(centers.back())}};
        } else {
            g = {{"name", "l1_norm"}, {"weight", 1.0}};
        }
        blocks.push_back({{"g", g}, {"nu", 1.0}, {"L", to_json(Li)}});
    }
    const Index rp = std::max<Index>(1, d / 4);
    const Matrix Lpsi = well_conditioned_map(rng, rp, d);

    nlohmann::json desc = {{"dim", d},
                           {"f", {{"name", "quadratic_psd"}, {"Q", to_json(Q)}, {"b", to_json(bf)}}},
                           {"h", {{"kind", "quadratic"}, {"Q", to_json(H)}, {"b", to_json(bh)}}},
                           {"blocks", blocks},
                           {"psi", half_sq_json(Lpsi)}};
    std::set<std::string> tags = {"penalty_active"};
    tags.insert(strongly_convex_duals ? "strongly_monotone" : "ergodic_only");
    auto inst = finish("composite_d" + std::to_string(d) + "_m" + std::to_string(m) + "_s" + std::to_string(seed) +
                           (strongly_convex_duals ? "_sc" : ""),
                       std::move(desc), std::move(tags));

    // Smooth reformulation: minimize f + h + sum env_i(L_i x) over ker L_psi by
    // projected gradient; the envelope gradients come from the catalog prox.
    const auto& prob = inst.minimization();
    const Matrix P = kernel_projector(Lpsi);
    auto grad = [&](const Vector& x) {
        Vector g = Q * x + bf + H * x + bh;
        for (std::size_t i = 0; i < prob.blocks.size(); ++i) {
            const auto& b = prob.blocks[i];
            const Vector y = Ls[i] * x;
            g += Ls[i].transpose() * ((y - b.g.prox(b.nu, y)) / b.nu);
        }
        return g;
    };
    double Lf = qf.maxCoeff() + qh.maxCoeff();
    for (const auto& Li : Ls) Lf += Li.squaredNorm();  // Frobenius bound on ||L_i||^2
    const double t = 1.0 / Lf;
    Vector x = Vector::Zero(d);
    bool ok = false;
    for (long it = 0; it < 2'000'000; ++it) {
        const Vector nx = P * (x - t * grad(x));
        const double gm = (nx - x).norm() / t;
        x = nx;
        if (gm <= 1e-11) {
            ok = true;
            break;
        }
    }
    if (!ok) throw OracleFailure("composite oracle: projected gradient did not reach 1e-11");
    inst.oracle_solution = x;
    inst.oracle_method = "projected gradient on the smoothed objective over ker L_psi to gradient-mapping norm 1e-11";
    return inst;
}

namespace {

Matrix random_monotone(Rng& rng, Index n, double scale) {
    const Matrix G = gaussian(rng, n, n);
    const Matrix K = gaussian(rng, n, n);
    Matrix M = G * G.transpose() / static_cast<double>(n) + 0.5 * (K - K.transpose()) / std::sqrt(static_cast<double>(n));
    return scale * M / std::max(1e-12, M.operatorNorm());
}

}  // namespace

PrimalDualProblem gen_random_primal_dual(Index d, Index m, Index dual_dim, std::uint64_t seed, bool with_penalty) {
    if (d < 1 || m < 0 || (m > 0 && dual_dim < 1)) throw InvalidInput("gen_random_primal_dual: bad dimensions");
    Rng rng(seed);
    auto A = ResolventOperator::linear(random_monotone(rng, d, 1.0));
    auto C = LipschitzOperator::linear(random_monotone(rng, d, 0.5));
    LipschitzOperator B = LipschitzOperator::zero(d);
    Projection proj;
    if (with_penalty) {
        const Matrix Lb = well_conditioned_map(rng, std::max<Index>(1, d / 2), d);
        B = LipschitzOperator::linear(Lb.transpose() * Lb);
        AffineProjector P(Lb);
        proj = [P](const Vector& x) { return P(x); };
    }
    std::vector<DualBlock> blocks;
    for (Index i = 0; i < m; ++i) {
        auto Bi = ResolventOperator::linear(random_monotone(rng, dual_dim, 1.0));
        auto Di = LipschitzOperator::linear(random_monotone(rng, dual_dim, 0.5));
        Matrix Li = gaussian(rng, dual_dim, d);
        Li /= Li.operatorNorm();
        blocks.push_back(DualBlock{std::move(Bi), std::move(Di), LinearMap(Li)});
    }
    return PrimalDualProblem::make(std::move(A), std::move(C), std::move(B), std::move(blocks), std::move(proj));
}

nlohmann::json export_instance(const ProblemInstance& inst) {
    nlohmann::json j = {{"id", inst.id}, {"problem", inst.description}, {"oracle_method", inst.oracle_method}};
    j["regime_tags"] = inst.regime_tags;
    if (inst.oracle_solution) j["oracle_solution"] = to_json(*inst.oracle_solution);
    auto verts = nlohmann::json::array();
    for (const auto& v : inst.solution_vertices) verts.push_back(to_json(v));
    j["solution_vertices"] = verts;
    return j;
}

ProblemInstance import_instance(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("problem")) throw InvalidInput("instance: missing 'problem'");
    ProblemInstance inst;
    inst.id = doc.value("id", "imported");
    inst.problem = min_problem_from_json(doc["problem"]);
    inst.description = doc["problem"];
    inst.oracle_method = doc.value("oracle_method", "");
    if (doc.contains("regime_tags")) inst.regime_tags = doc["regime_tags"].get<std::set<std::string>>();
    if (doc.contains("oracle_solution")) inst.oracle_solution = vector_from_json(doc["oracle_solution"], "oracle_solution");
    if (doc.contains("solution_vertices")) {
        for (const auto& v : doc["solution_vertices"]) inst.solution_vertices.push_back(vector_from_json(v, "vertex"));
    }
    return inst;
}

std::vector<GraphSample> graph_samples(const ProblemInstance& inst, int count, std::uint64_t seed) {
    std::vector<GraphSample> out;
    if (count <= 0) return out;
    const auto& prob = inst.minimization();
    if (!prob.psi.M_projection) throw InvalidInput("graph_samples: the penalty exposes no projection onto M");
    for (const auto& b : prob.blocks) {
        if (!(b.nu > 0.0)) throw InvalidInput("graph_samples: composite blocks need a Moreau-envelope smoothing");
    }
    Rng rng(seed);
    const double scale = inst.oracle_solution ? std::max(1.0, inst.oracle_solution->norm()) : 1.0;
    const int attempts = 2 * count;
    for (int k = 0; k < attempts && static_cast<int>(out.size()) < count; ++k) {
        const Vector y = scale * gaussian(rng, prob.dim);
        const Vector u = prob.psi.M_projection(y);
        const auto a = prob.f.subgradient(u);
        if (!a) continue;
        Vector w = *a + (y - u);
        if (prob.h) w += prob.h->gradient(u);
        for (const auto& b : prob.blocks) {
            const Vector z = b.L.apply(u);
            w += b.L.apply_adjoint((z - b.g.prox(b.nu, z)) / b.nu);
        }
        out.push_back(GraphSample{u, w});
    }
    if (static_cast<int>(out.size()) * 2 < count) {
        throw InvalidSample("graph_samples: only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                            " samples were constructible");
    }
    return out;
}

}  // namespace fbfp
