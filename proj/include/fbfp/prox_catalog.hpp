#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fbfp/linalg.hpp"
#include "fbfp/operators.hpp"

namespace fbfp {

// Coarse description of dom f, enough to decide whether a Minkowski sum of
// domains is the whole space.
enum class DomainKind { full_space, box, affine, unknown };

std::string_view to_string(DomainKind k);

// A closed convex function known through its proximal map.
//
// `conjugate_prox(gamma, x)` returns prox_{gamma f*}(x). When the entry
// registers a closed form for it, that form is used; otherwise it is derived
// from prox_f by the Moreau decomposition. Keeping the closed form separate is
// what makes the decomposition testable rather than true by construction.
class ProxEntry {
public:
    using ProxFn = std::function<Vector(double, const Vector&)>;
    using ValueFn = std::function<double(const Vector&)>;
    using SubgradFn = std::function<std::optional<Vector>(const Vector&)>;

    struct Parts {
        std::string name;
        ProxFn prox;
        ValueFn value;
        ProxFn conjugate_prox;  // optional closed form of prox_{gamma f*}
        SubgradFn subgradient;  // optional: some element of the subdifferential
        DomainKind domain = DomainKind::full_space;
        double strong_convexity = 0.0;
        double conjugate_strong_convexity = 0.0;
        nlohmann::json parameters = nlohmann::json::object();
    };

    ProxEntry() = default;
    explicit ProxEntry(Parts parts);

    const std::string& name() const { return p_.name; }
    const nlohmann::json& parameters() const { return p_.parameters; }
    DomainKind domain() const { return p_.domain; }
    double strong_convexity() const { return p_.strong_convexity; }
    double conjugate_strong_convexity() const { return p_.conjugate_strong_convexity; }
    bool has_closed_form_conjugate() const { return static_cast<bool>(p_.conjugate_prox); }

    Vector prox(double gamma, const Vector& x) const;
    Vector conjugate_prox(double gamma, const Vector& x) const;
    // prox_{gamma f*}(x) = x - gamma prox_{f/gamma}(x/gamma), ignoring any closed form.
    Vector conjugate_prox_by_moreau(double gamma, const Vector& x) const;
    double value(const Vector& x) const;
    std::optional<Vector> subgradient(const Vector& x) const;

    // J_{gamma df} as a resolvent operator on R^dim.
    ResolventOperator resolvent(Index dim) const;
    // J_{gamma df*} = J_{gamma (df)^{-1}}.
    ResolventOperator conjugate_resolvent(Index dim) const;

private:
    Parts p_;
};

// prox_{(1/gamma) f*}(x / gamma), computed as (x - prox_{gamma f}(x)) / gamma.
Vector moreau_conjugate_prox(const ProxEntry& entry, double gamma, const Vector& x);

ProxEntry make_l1_norm(double weight = 1.0);
// f(x) = 1/2 ||x - center||^2; an empty center means the origin.
ProxEntry make_squared_l2(Vector center = {});
// Indicator of {x : Ax = b}.
ProxEntry make_indicator_affine(const Matrix& A, Vector b = {});
// Indicator of the box [lower, upper] (componentwise).
ProxEntry make_indicator_box(Vector lower, Vector upper);
// f(x) = 1/2 x^T Q x + b^T x with Q symmetric positive semidefinite.
ProxEntry make_quadratic_psd(const Matrix& Q, Vector b = {});
// g(x) = weight * base(scale * x + shift).
ProxEntry make_scaled_translate(const ProxEntry& base, double weight, double scale, Vector shift = {});

// Looks up a catalog entry by name. Recognized names: l1_norm, squared_l2,
// indicator_affine, indicator_box, quadratic_psd, scaled_translate.
// Throws CatalogMiss for anything else and InvalidInput for bad parameters.
ProxEntry prox_catalog_lookup(std::string_view name, const nlohmann::json& params);

// Same, reading {"name": ..., <parameters>} from one object.
ProxEntry prox_catalog_lookup(const nlohmann::json& spec);

}  // namespace fbfp
