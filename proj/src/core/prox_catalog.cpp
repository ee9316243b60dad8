#include "fbfp/prox_catalog.hpp"

#include <cmath>
#include <limits>

#include "fbfp/errors.hpp"
#include "fbfp/json_io.hpp"

namespace fbfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const Vector& x, Index expected, const char* who) {
    if (expected > 0 && x.size() != expected) {
        throw InvalidInput(std::string(who) + ": dimension mismatch (expected " + std::to_string(expected) +
                           ", got " + std::to_string(x.size()) + ")");
    }
}

Vector soft_threshold(const Vector& x, double t) {
    return x.array().sign() * (x.array().abs() - t).max(0.0);
}

}  // namespace

std::string_view to_string(DomainKind k) {
    switch (k) {
        case DomainKind::full_space: return "full_space";
        case DomainKind::box: return "box";
        case DomainKind::affine: return "affine";
        case DomainKind::unknown: return "unknown";
    }
    return "unknown";
}

ProxEntry::ProxEntry(Parts parts) : p_(std::move(parts)) {
    if (!p_.prox) throw InvalidInput("ProxEntry '" + p_.name + "': missing prox");
    if (!p_.value) throw InvalidInput("ProxEntry '" + p_.name + "': missing value");
}

Vector ProxEntry::prox(double gamma, const Vector& x) const {
    if (!(gamma > 0.0)) throw InvalidInput("prox: gamma must be positive");
    return p_.prox(gamma, x);
}

Vector ProxEntry::conjugate_prox(double gamma, const Vector& x) const {
    if (!(gamma > 0.0)) throw InvalidInput("conjugate_prox: gamma must be positive");
    if (p_.conjugate_prox) return p_.conjugate_prox(gamma, x);
    return conjugate_prox_by_moreau(gamma, x);
}

Vector ProxEntry::conjugate_prox_by_moreau(double gamma, const Vector& x) const {
    if (!(gamma > 0.0)) throw InvalidInput("conjugate_prox: gamma must be positive");
    return x - gamma * p_.prox(1.0 / gamma, x / gamma);
}

double ProxEntry::value(const Vector& x) const { return p_.value(x); }

std::optional<Vector> ProxEntry::subgradient(const Vector& x) const {
    if (!p_.subgradient) return std::nullopt;
    return p_.subgradient(x);
}

ResolventOperator ProxEntry::resolvent(Index dim) const {
    auto self = *this;
    return ResolventOperator(
        dim, [self](double g, const Vector& x) { return self.prox(g, x); }, p_.strong_convexity);
}

ResolventOperator ProxEntry::conjugate_resolvent(Index dim) const {
    auto self = *this;
    return ResolventOperator(
        dim, [self](double g, const Vector& x) { return self.conjugate_prox(g, x); },
        p_.conjugate_strong_convexity);
}

Vector moreau_conjugate_prox(const ProxEntry& entry, double gamma, const Vector& x) {
    if (!(gamma > 0.0)) throw InvalidInput("moreau_conjugate_prox: gamma must be positive");
    return (x - entry.prox(gamma, x)) / gamma;
}

ProxEntry make_l1_norm(double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) throw InvalidInput("l1_norm: weight must be >= 0");
    ProxEntry::Parts p;
    p.name = "l1_norm";
    p.parameters = {{"weight", weight}};
    p.prox = [weight](double g, const Vector& x) { return soft_threshold(x, g * weight); };
    p.value = [weight](const Vector& x) { return weight * x.lpNorm<1>(); };
    p.conjugate_prox = [weight](double, const Vector& y) {
        return Vector(y.cwiseMax(-weight).cwiseMin(weight));
    };
    p.subgradient = [weight](const Vector& x) { return std::optional<Vector>(weight * x.array().sign().matrix()); };
    return ProxEntry(std::move(p));
}

ProxEntry make_squared_l2(Vector center) {
    require_finite(center, "squared_l2 center");
    const Index dim = center.size();
    ProxEntry::Parts p;
    p.name = "squared_l2";
    p.parameters = nlohmann::json::object();
    if (dim > 0) p.parameters["center"] = to_json(center);
    auto c = [center](Index n) { return center.size() ? center : Vector(Vector::Zero(n)); };
    p.prox = [c, dim](double g, const Vector& x) {
        check_dim(x, dim, "squared_l2");
        return Vector((x + g * c(x.size())) / (1.0 + g));
    };
    p.value = [c, dim](const Vector& x) {
        check_dim(x, dim, "squared_l2");
        return 0.5 * (x - c(x.size())).squaredNorm();
    };
    p.conjugate_prox = [c, dim](double g, const Vector& y) {
        check_dim(y, dim, "squared_l2");
        return Vector((y - g * c(y.size())) / (1.0 + g));
    };
    p.subgradient = [c](const Vector& x) { return std::optional<Vector>(x - c(x.size())); };
    p.strong_convexity = 1.0;
    p.conjugate_strong_convexity = 1.0;
    return ProxEntry(std::move(p));
}

ProxEntry make_indicator_affine(const Matrix& A, Vector b) {
    AffineProjector proj(A, b);
    const Index dim = A.cols();
    const Matrix P = proj.kernel_projector();
    const Vector x0 = proj.offset();
    const Matrix Acopy = A;
    const Vector bcopy = b.size() ? b : Vector(Vector::Zero(A.rows()));
    ProxEntry::Parts p;
    p.name = "indicator_affine";
    p.parameters = {{"A", to_json(A)}, {"b", to_json(bcopy)}};
    p.domain = DomainKind::affine;
    p.prox = [proj](double, const Vector& x) { return proj(x); };
    auto feasible = [Acopy, bcopy, dim](const Vector& x) {
        check_dim(x, dim, "indicator_affine");
        return (Acopy * x - bcopy).norm() <= 1e-9 * (1.0 + bcopy.norm() + x.norm());
    };
    p.value = [feasible](const Vector& x) { return feasible(x) ? 0.0 : kInf; };
    // f*(y) = <y, x0> + indicator of ran A^T.
    p.conjugate_prox = [P, x0, dim](double g, const Vector& y) {
        check_dim(y, dim, "indicator_affine");
        const Vector u = y - g * x0;
        return Vector(u - P * u);
    };
    p.subgradient = [feasible, dim](const Vector& x) -> std::optional<Vector> {
        if (!feasible(x)) return std::nullopt;
        return Vector(Vector::Zero(dim));
    };
    return ProxEntry(std::move(p));
}

ProxEntry make_indicator_box(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw InvalidInput("indicator_box: bounds must be nonempty and of equal dimension");
    }
    if ((lower.array() > upper.array()).any()) throw InvalidInput("indicator_box: lower > upper");
    if (lower.array().isNaN().any() || upper.array().isNaN().any()) throw InvalidInput("indicator_box: NaN bound");
    const Index dim = lower.size();
    ProxEntry::Parts p;
    p.name = "indicator_box";
    p.parameters = {{"lower", to_json(lower)}, {"upper", to_json(upper)}};
    p.domain = DomainKind::box;
    p.prox = [lower, upper, dim](double, const Vector& x) {
        check_dim(x, dim, "indicator_box");
        return Vector(x.cwiseMax(lower).cwiseMin(upper));
    };
    auto inside = [lower, upper, dim](const Vector& x) {
        check_dim(x, dim, "indicator_box");
        return ((x.array() >= lower.array() - 1e-12) && (x.array() <= upper.array() + 1e-12)).all();
    };
    p.value = [inside](const Vector& x) { return inside(x) ? 0.0 : kInf; };
    // Support function of the box: slope `upper` on the positive side, `lower` on the negative.
    p.conjugate_prox = [lower, upper, dim](double g, const Vector& y) {
        check_dim(y, dim, "indicator_box");
        Vector v(y.size());
        for (Index i = 0; i < y.size(); ++i) {
            if (y[i] > g * upper[i]) v[i] = y[i] - g * upper[i];
            else if (y[i] < g * lower[i]) v[i] = y[i] - g * lower[i];
            else v[i] = 0.0;
        }
        return v;
    };
    p.subgradient = [inside, dim](const Vector& x) -> std::optional<Vector> {
        if (!inside(x)) return std::nullopt;
        return Vector(Vector::Zero(dim));
    };
    return ProxEntry(std::move(p));
}

ProxEntry make_quadratic_psd(const Matrix& Q, Vector b) {
    require_finite(Q, "quadratic_psd Q");
    if (Q.rows() != Q.cols() || Q.rows() == 0) throw InvalidInput("quadratic_psd: Q must be square");
    const Index dim = Q.rows();
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
        throw InvalidInput("quadratic_psd: Q must be symmetric");
    }
    const Matrix Qs = 0.5 * (Q + Q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(Qs, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(1.0, hi)) throw InvalidInput("quadratic_psd: Q must be positive semidefinite");
    if (b.size() == 0) b = Vector::Zero(dim);
    check_dim(b, dim, "quadratic_psd b");
    require_finite(b, "quadratic_psd b");

    ProxEntry::Parts p;
    p.name = "quadratic_psd";
    p.parameters = {{"Q", to_json(Qs)}, {"b", to_json(b)}};
    p.prox = [Qs, b, dim](double g, const Vector& x) {
        check_dim(x, dim, "quadratic_psd");
        Matrix K = Matrix::Identity(dim, dim) + g * Qs;
        return Vector(K.llt().solve(x - g * b));
    };
    p.value = [Qs, b, dim](const Vector& x) {
        check_dim(x, dim, "quadratic_psd");
        return 0.5 * x.dot(Qs * x) + b.dot(x);
    };
    p.conjugate_prox = [Qs, b, dim](double g, const Vector& y) {
        check_dim(y, dim, "quadratic_psd");
        Matrix K = g * Matrix::Identity(dim, dim) + Qs;
        return Vector(K.llt().solve(Qs * y + g * b));
    };
    p.subgradient = [Qs, b](const Vector& x) { return std::optional<Vector>(Qs * x + b); };
    p.strong_convexity = std::max(0.0, lo);
    p.conjugate_strong_convexity = hi > 0.0 ? 1.0 / hi : 0.0;
    return ProxEntry(std::move(p));
}

ProxEntry make_scaled_translate(const ProxEntry& base, double weight, double scale, Vector shift) {
    if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidInput("scaled_translate: weight must be > 0");
    if (scale == 0.0 || !std::isfinite(scale)) throw InvalidInput("scaled_translate: scale must be nonzero");
    require_finite(shift, "scaled_translate shift");
    const Index dim = shift.size();
    auto sh = [shift](Index n) { return shift.size() ? shift : Vector(Vector::Zero(n)); };

    ProxEntry::Parts p;
    p.name = "scaled_translate";
    p.parameters = {{"base", base.parameters()}, {"weight", weight}, {"scale", scale}};
    p.parameters["base"]["name"] = base.name();
    if (dim > 0) p.parameters["shift"] = to_json(shift);
    p.domain = base.domain();
    p.prox = [base, weight, scale, sh, dim](double g, const Vector& x) {
        check_dim(x, dim, "scaled_translate");
        const Vector s = sh(x.size());
        return Vector((base.prox(g * scale * scale * weight, scale * x + s) - s) / scale);
    };
    p.value = [base, weight, scale, sh, dim](const Vector& x) {
        check_dim(x, dim, "scaled_translate");
        return weight * base.value(scale * x + sh(x.size()));
    };
    // g*(y) = w f*(y / (a w)) - <shift, y> / a.
    p.conjugate_prox = [base, weight, scale, sh, dim](double g, const Vector& y) {
        check_dim(y, dim, "scaled_translate");
        const double s = scale * weight;
        const Vector u = y + (g / scale) * sh(y.size());
        return Vector(s * base.conjugate_prox(g * weight / (s * s), u / s));
    };
    p.subgradient = [base, weight, scale, sh](const Vector& x) -> std::optional<Vector> {
        auto inner = base.subgradient(scale * x + sh(x.size()));
        if (!inner) return std::nullopt;
        return Vector(weight * scale * *inner);
    };
    p.strong_convexity = base.strong_convexity() * weight * scale * scale;
    p.conjugate_strong_convexity = base.conjugate_strong_convexity() / (weight * scale * scale);
    return ProxEntry(std::move(p));
}

namespace {

Vector vector_param(const nlohmann::json& params, const char* key, bool required) {
    if (!params.contains(key)) {
        if (required) throw InvalidInput(std::string("catalog: missing parameter '") + key + "'");
        return {};
    }
    return vector_from_json(params.at(key), key);
}

double number_param(const nlohmann::json& params, const char* key, double fallback) {
    if (!params.contains(key)) return fallback;
    const auto& v = params.at(key);
    if (!v.is_number()) throw InvalidInput(std::string("catalog: parameter '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

ProxEntry prox_catalog_lookup(std::string_view name, const nlohmann::json& params) {
    if (!params.is_object()) throw InvalidInput("catalog: parameters must be an object");
    if (name == "l1_norm") return make_l1_norm(number_param(params, "weight", 1.0));
    if (name == "squared_l2") return make_squared_l2(vector_param(params, "center", false));
    if (name == "indicator_affine") {
        if (!params.contains("A")) throw InvalidInput("catalog: missing parameter 'A'");
        return make_indicator_affine(matrix_from_json(params.at("A"), "A"), vector_param(params, "b", false));
    }
    if (name == "indicator_box") {
        return make_indicator_box(vector_param(params, "lower", true), vector_param(params, "upper", true));
    }
    if (name == "quadratic_psd") {
        if (!params.contains("Q")) throw InvalidInput("catalog: missing parameter 'Q'");
        return make_quadratic_psd(matrix_from_json(params.at("Q"), "Q"), vector_param(params, "b", false));
    }
    if (name == "scaled_translate") {
        if (!params.contains("base")) throw InvalidInput("catalog: missing parameter 'base'");
        return make_scaled_translate(prox_catalog_lookup(params.at("base")), number_param(params, "weight", 1.0),
                                     number_param(params, "scale", 1.0), vector_param(params, "shift", false));
    }
    throw CatalogMiss("catalog: unknown entry '" + std::string(name) + "'");
}

ProxEntry prox_catalog_lookup(const nlohmann::json& spec) {
    if (!spec.is_object() || !spec.contains("name") || !spec.at("name").is_string()) {
        throw InvalidInput("catalog: entry must be an object with a string 'name'");
    }
    return prox_catalog_lookup(spec.at("name").get<std::string>(), spec);
}

}  // namespace fbfp
