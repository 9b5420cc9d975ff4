#include "wkbsplit/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace wkbsplit {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("nonlinearity: " + msg);
}

double xi_norm2(const std::array<double, 3>& xi) {
    return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
}

}  // namespace

KernelSpec KernelSpec::poisson(double lambda, int dim) {
    if (dim < 3) fail("Poisson kernel requires dim >= 3");
    if (!std::isfinite(lambda)) fail("lambda must be finite");
    KernelSpec k;
    k.type_ = Type::Poisson;
    k.lambda_ = lambda;
    k.dim_ = dim;
    k.name_ = "poisson";
    return k;
}

KernelSpec KernelSpec::smoothed(double lambda) {
    if (!std::isfinite(lambda)) fail("lambda must be finite");
    KernelSpec k;
    k.type_ = Type::Smoothed;
    k.lambda_ = lambda;
    k.name_ = "smoothed";
    return k;
}

KernelSpec KernelSpec::custom(
    std::string name, std::function<double(const std::array<double, 3>&)> m) {
    if (!m) fail("custom kernel needs a multiplier function");
    KernelSpec k;
    k.type_ = Type::Custom;
    k.name_ = name.empty() ? "custom" : std::move(name);
    k.custom_ = std::move(m);
    return k;
}

double KernelSpec::multiplier(const std::array<double, 3>& xi) const {
    switch (type_) {
        case Type::Poisson: {
            const double xi2 = xi_norm2(xi);
            return xi2 == 0.0 ? 0.0 : -lambda_ / xi2;
        }
        case Type::Smoothed:
            return lambda_ / (1.0 + xi_norm2(xi));
        case Type::Custom:
            return custom_(xi);
    }
    throw std::logic_error("kernel: unknown type");
}

void KernelSpec::validate_on(const Grid& g) const {
    if (type_ == Type::Poisson) {
        if (g.dim() < 3) fail("Poisson kernel applied on a grid with dim < 3");
        if (dim_ != g.dim()) fail("Poisson kernel constructed for another dim");
        return;
    }
    if (type_ != Type::Custom) return;
    // custom multipliers: finite everywhere, even under xi -> -xi
    double scale = 0.0;
    std::vector<double> tab(g.size());
    for_each_mode(g, [&](std::size_t flat, const std::array<double, 3>& xi,
                         const std::array<bool, 3>&) {
        const double m = custom_(xi);
        if (!std::isfinite(m)) fail("custom multiplier not finite on grid modes");
        tab[flat] = m;
        scale = std::max(scale, std::abs(m));
    });
    for_each_mode(g, [&](std::size_t flat, const std::array<double, 3>&,
                         const std::array<bool, 3>&) {
        auto idx = g.unravel(flat);
        std::array<int, 3> neg{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) neg[a] = (g.n(a) - idx[a]) % g.n(a);
        const std::size_t conj = g.index(neg[0], neg[1], neg[2]);
        if (std::abs(tab[flat] - tab[conj]) > 1e-12 * std::max(1.0, scale))
            fail("custom multiplier is not even");
    });
}

LocalTerm LocalTerm::cubic(double c) {
    return LocalTerm{[c](double rho) { return c * rho; },
                     [c](double) { return c; }, "cubic"};
}

NonlinearitySpec NonlinearitySpec::make(std::optional<KernelSpec> kernel,
                                        std::optional<LocalTerm> local,
                                        double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) fail("alpha must be finite and >= 0");
    if (alpha > 0.0 && alpha < 1.0) fail("alpha in (0,1) is not admissible");
    if (!kernel && !local) fail("need a kernel, a local term, or both");
    if (alpha == 0.0 && local)
        fail("the strong regime (alpha = 0) admits only the convolution part");
    if (local) {
        if (!local->f || !local->df) fail("local term needs f2 and f2'");
        if (std::abs(local->f(0.0)) > 1e-14) fail("local term must satisfy f2(0) = 0");
    }
    NonlinearitySpec s;
    s.kernel_ = std::move(kernel);
    s.local_ = std::move(local);
    s.alpha_ = alpha;
    return s;
}

const KernelSpec& NonlinearitySpec::kernel() const {
    if (!kernel_) fail("spec has no kernel");
    return *kernel_;
}

const LocalTerm& NonlinearitySpec::local() const {
    if (!local_) fail("spec has no local term");
    return *local_;
}

RealField apply_kernel(const KernelSpec& k, const RealField& rho) {
    k.validate_on(rho.grid);
    ComplexField hat = fft_forward(rho);
    for_each_mode(rho.grid, [&](std::size_t flat, const std::array<double, 3>& xi,
                                const std::array<bool, 3>&) {
        hat.v[flat] *= k.multiplier(xi);
    });
    return real_part_checked(fft_inverse(hat), 1e-12, "apply_kernel");
}

std::vector<RealField> apply_kernel(const KernelSpec& k,
                                    const std::vector<RealField>& w) {
    std::vector<RealField> out;
    out.reserve(w.size());
    for (const RealField& c : w) out.push_back(apply_kernel(k, c));
    return out;
}

RealField apply_f(const NonlinearitySpec& spec, const RealField& rho) {
    RealField out = spec.has_kernel() ? apply_kernel(spec.kernel(), rho)
                                      : RealField(rho.grid, 0.0);
    if (spec.has_local()) {
        const auto& f2 = spec.local().f;
        for (std::size_t i = 0; i < rho.size(); ++i) out.v[i] += f2(rho.v[i]);
    }
    return out;
}

std::vector<RealField> grad_f(const NonlinearitySpec& spec, const RealField& rho) {
    return gradient(apply_f(spec, rho));
}

GainBoundReport check_gain_bound(const NonlinearitySpec& spec,
                                 const RealField& rho, double s) {
    if (!spec.has_kernel()) fail("gain bound is about the convolution part");
    const KernelSpec& k = spec.kernel();
    k.validate_on(rho.grid);

    GainBoundReport rep;
    RealField f = apply_kernel(k, rho);
    rep.lhs_grad = norm(gradient(f), NormKind::Hs(s + 1));
    rep.lhs_inf = norm(f, NormKind::Linf());
    rep.rhs = norm(rho, NormKind::Hs(s)) + norm(rho, NormKind::L1());

    double c = 0.0;
    for_each_mode(rho.grid, [&](std::size_t, const std::array<double, 3>& xi,
                                const std::array<bool, 3>&) {
        c = std::max(c, (1.0 + xi_norm2(xi)) * std::abs(k.multiplier(xi)));
    });
    rep.constant = c;
    rep.ratio = rep.rhs > 0.0 ? rep.lhs_grad / rep.rhs : 0.0;
    rep.pass = rep.ratio <= 1.05 * rep.constant;
    return rep;
}

}  // namespace wkbsplit
