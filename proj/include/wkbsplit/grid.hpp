#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace wkbsplit {

using cplx = std::complex<double>;

// Uniform periodic grid on a box, one to three axes, power-of-two points per
// axis. Immutable after make(). Values are stored C row-major, last axis
// fastest, matching the transform backend's layout.
class Grid {
public:
    static Grid make(int dim, const std::vector<int>& n,
                     const std::vector<double>& length,
                     const std::vector<double>& xmin);

    int dim() const { return dim_; }
    int n(int axis) const { return n_[check_axis(axis)]; }
    std::size_t size() const { return total_; }
    double length(int axis) const { return len_[check_axis(axis)]; }
    double xmin(int axis) const { return x0_[check_axis(axis)]; }
    double dx(int axis) const { return len_[check_axis(axis)] / n_[axis]; }
    double min_dx() const;
    double cell_volume() const;  // prod of dx
    double box_volume() const;   // prod of length

    double coord(int axis, int i) const { return xmin(axis) + i * dx(axis); }

    // Wavenumber of FFT bin k on an axis: 2*pi*k'/L with k' = k for
    // k < N/2 and k' = k - N otherwise, so bins run 0,1,..,N/2-1,-N/2,..,-1.
    double xi(int axis, int k) const;
    bool is_nyquist(int axis, int k) const { return 2 * k == n(axis); }

    std::size_t index(int i0, int i1 = 0, int i2 = 0) const {
        return (static_cast<std::size_t>(i0) * n_[1] + i1) * n_[2] + i2;
    }
    std::array<int, 3> unravel(std::size_t flat) const;

    bool operator==(const Grid& o) const;
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int check_axis(int axis) const;

    int dim_ = 1;
    std::array<int, 3> n_{1, 1, 1};
    std::array<double, 3> len_{1, 1, 1};
    std::array<double, 3> x0_{0, 0, 0};
    std::size_t total_ = 1;
};

struct RealField {
    Grid grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(const Grid& g, double fill = 0.0)
        : grid(g), v(g.size(), fill) {}
    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

struct ComplexField {
    Grid grid;
    std::vector<cplx> v;

    ComplexField() = default;
    explicit ComplexField(const Grid& g, cplx fill = {})
        : grid(g), v(g.size(), fill) {}
    std::size_t size() const { return v.size(); }
    cplx& operator[](std::size_t i) { return v[i]; }
    const cplx& operator[](std::size_t i) const { return v[i]; }
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// Fill from a callable taking the physical coordinates of each point.
template <typename F>
RealField sample_real(const Grid& g, F&& f) {
    RealField out(g);
    std::array<double, 3> x{0, 0, 0};
    std::size_t flat = 0;
    for (int i0 = 0; i0 < (g.dim() > 0 ? g.n(0) : 1); ++i0) {
        x[0] = g.coord(0, i0);
        for (int i1 = 0; i1 < (g.dim() > 1 ? g.n(1) : 1); ++i1) {
            if (g.dim() > 1) x[1] = g.coord(1, i1);
            for (int i2 = 0; i2 < (g.dim() > 2 ? g.n(2) : 1); ++i2) {
                if (g.dim() > 2) x[2] = g.coord(2, i2);
                out.v[flat++] = f(x);
            }
        }
    }
    return out;
}

template <typename F>
ComplexField sample_complex(const Grid& g, F&& f) {
    ComplexField out(g);
    std::array<double, 3> x{0, 0, 0};
    std::size_t flat = 0;
    for (int i0 = 0; i0 < (g.dim() > 0 ? g.n(0) : 1); ++i0) {
        x[0] = g.coord(0, i0);
        for (int i1 = 0; i1 < (g.dim() > 1 ? g.n(1) : 1); ++i1) {
            if (g.dim() > 1) x[1] = g.coord(1, i1);
            for (int i2 = 0; i2 < (g.dim() > 2 ? g.n(2) : 1); ++i2) {
                if (g.dim() > 2) x[2] = g.coord(2, i2);
                out.v[flat++] = f(x);
            }
        }
    }
    return out;
}

// Visit every spectral bin: f(flat_index, xi_vector, nyquist_mask_per_axis).
template <typename F>
void for_each_mode(const Grid& g, F&& f) {
    std::array<double, 3> xi{0, 0, 0};
    std::array<bool, 3> nyq{false, false, false};
    std::size_t flat = 0;
    for (int k0 = 0; k0 < (g.dim() > 0 ? g.n(0) : 1); ++k0) {
        xi[0] = g.xi(0, k0);
        nyq[0] = g.is_nyquist(0, k0);
        for (int k1 = 0; k1 < (g.dim() > 1 ? g.n(1) : 1); ++k1) {
            if (g.dim() > 1) { xi[1] = g.xi(1, k1); nyq[1] = g.is_nyquist(1, k1); }
            for (int k2 = 0; k2 < (g.dim() > 2 ? g.n(2) : 1); ++k2) {
                if (g.dim() > 2) { xi[2] = g.xi(2, k2); nyq[2] = g.is_nyquist(2, k2); }
                f(flat++, xi, nyq);
            }
        }
    }
}

// ---- transforms -----------------------------------------------------------
// Symmetric normalization: forward and inverse both carry 1/sqrt(prod N), so
// forward(inverse(u)) == u and the plain l2 sum is preserved (Plancherel).

ComplexField fft_forward(const ComplexField& u);
ComplexField fft_inverse(const ComplexField& u);
ComplexField fft_forward(const RealField& u);

// ---- pointwise algebra ----------------------------------------------------

ComplexField to_complex(const RealField& u);
RealField real_part(const ComplexField& u);
RealField imag_part(const ComplexField& u);
// real part after checking |Im| <= tol * max(1, |field|_inf); throws otherwise
RealField real_part_checked(const ComplexField& u, double tol, const char* what);
RealField abs2(const ComplexField& u);   // |u|^2 pointwise
ComplexField conj(const ComplexField& u);

double max_abs(const RealField& u);
double max_abs(const ComplexField& u);
double integral(const RealField& u);     // cell_volume * sum

RealField operator+(const RealField& a, const RealField& b);
RealField operator-(const RealField& a, const RealField& b);
RealField operator*(double s, const RealField& a);
RealField operator*(const RealField& a, const RealField& b);
RealField& operator+=(RealField& a, const RealField& b);
RealField& operator-=(RealField& a, const RealField& b);

ComplexField operator+(const ComplexField& a, const ComplexField& b);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField operator*(cplx s, const ComplexField& a);
ComplexField operator*(const ComplexField& a, const ComplexField& b);
ComplexField operator*(const RealField& a, const ComplexField& b);
ComplexField& operator+=(ComplexField& a, const ComplexField& b);
ComplexField& operator-=(ComplexField& a, const ComplexField& b);

// y += s * x
void axpy(RealField& y, double s, const RealField& x);
void axpy(ComplexField& y, cplx s, const ComplexField& x);

// ---- spectral calculus ----------------------------------------------------

// d^|order| / dx^order via (i xi)^order multipliers. For odd total order on an
// axis the Nyquist bin of that axis is zeroed (it has no well-defined sign).
ComplexField spectral_derivative(const ComplexField& u, std::array<int, 3> order);
RealField spectral_derivative(const RealField& u, std::array<int, 3> order);

std::vector<RealField> gradient(const RealField& u);
std::vector<ComplexField> gradient(const ComplexField& u);
RealField laplacian(const RealField& u);
ComplexField laplacian(const ComplexField& u);
RealField divergence(const std::vector<RealField>& w);

// Zero every bin with |k'| > N/3 on any axis (2/3 dealiasing mask).
ComplexField dealias_23(const ComplexField& u);
RealField dealias_23(const RealField& u);

// ---- norms ----------------------------------------------------------------

struct NormKind {
    enum class Kind { L1, L2, Linf, Hs, H1eps, SigmaEps };
    Kind kind = Kind::L2;
    double s = 0.0;
    int k = 0;
    double eps = 1.0;

    static NormKind L1() { return {Kind::L1, 0, 0, 1}; }
    static NormKind L2() { return {Kind::L2, 0, 0, 1}; }
    static NormKind Linf() { return {Kind::Linf, 0, 0, 1}; }
    static NormKind Hs(double s);
    static NormKind H1eps(double eps);
    static NormKind SigmaEps(int k, double eps);
};

double norm(const ComplexField& u, const NormKind& kind);
double norm(const RealField& u, const NormKind& kind);
// Sobolev norm of a vector field: sqrt of summed squares of components.
double norm(const std::vector<RealField>& w, const NormKind& kind);

// ---- serialization --------------------------------------------------------
// One-line ASCII header, then raw little-endian float64 payload, C row-major,
// complex interleaved re,im:
//   FLD1 <real|complex> d=<d> N=<N0,..> L=<L0,..> xmin=<x0,..>\n

void write_fld1(const std::string& path, const RealField& u);
void write_fld1(const std::string& path, const ComplexField& u);
std::variant<RealField, ComplexField> read_fld1(const std::string& path);
RealField read_fld1_real(const std::string& path);
ComplexField read_fld1_complex(const std::string& path);

}  // namespace wkbsplit
