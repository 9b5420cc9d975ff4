#include "wkbsplit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wkbsplit {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("grid: " + msg);
}

}  // namespace

Grid Grid::make(int dim, const std::vector<int>& n,
                const std::vector<double>& length,
                const std::vector<double>& xmin) {
    if (dim < 1 || dim > 3) fail("dim must be 1, 2 or 3");
    auto want = static_cast<std::size_t>(dim);
    if (n.size() != want || length.size() != want || xmin.size() != want)
        fail("n, length, xmin must each have dim entries");
    Grid g;
    g.dim_ = dim;
    g.total_ = 1;
    for (int a = 0; a < dim; ++a) {
        if (!power_of_two(n[a]) || n[a] < 8)
            fail("points per axis must be a power of two >= 8");
        if (!(length[a] > 0.0) || !std::isfinite(length[a]))
            fail("axis length must be positive and finite");
        if (!std::isfinite(xmin[a])) fail("xmin must be finite");
        g.n_[a] = n[a];
        g.len_[a] = length[a];
        g.x0_[a] = xmin[a];
        g.total_ *= static_cast<std::size_t>(n[a]);
    }
    for (int a = dim; a < 3; ++a) {
        g.n_[a] = 1;
        g.len_[a] = 1.0;
        g.x0_[a] = 0.0;
    }
    return g;
}

int Grid::check_axis(int axis) const {
    if (axis < 0 || axis >= dim_) fail("axis out of range");
    return axis;
}

double Grid::min_dx() const {
    double m = dx(0);
    for (int a = 1; a < dim_; ++a) m = std::min(m, dx(a));
    return m;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= dx(a);
    return v;
}

double Grid::box_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= len_[a];
    return v;
}

double Grid::xi(int axis, int k) const {
    check_axis(axis);
    const int N = n_[axis];
    if (k < 0 || k >= N) fail("wavenumber index out of range");
    const int kk = (k < N / 2) ? k : k - N;
    return 2.0 * std::numbers::pi * kk / len_[axis];
}

std::array<int, 3> Grid::unravel(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    idx[2] = static_cast<int>(flat % n_[2]);
    flat /= n_[2];
    idx[1] = static_cast<int>(flat % n_[1]);
    idx[0] = static_cast<int>(flat / n_[1]);
    return idx;
}

bool Grid::operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && len_ == o.len_ && x0_ == o.x0_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": grids differ");
}

// ---- pointwise algebra ----------------------------------------------------

ComplexField to_complex(const RealField& u) {
    ComplexField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = u.v[i];
    return out;
}

RealField real_part(const ComplexField& u) {
    RealField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = u.v[i].real();
    return out;
}

RealField imag_part(const ComplexField& u) {
    RealField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = u.v[i].imag();
    return out;
}

RealField real_part_checked(const ComplexField& u, double tol, const char* what) {
    double iw = 0.0, mag = 0.0;
    for (const cplx& z : u.v) {
        iw = std::max(iw, std::abs(z.imag()));
        mag = std::max(mag, std::abs(z));
    }
    if (iw > tol * std::max(1.0, mag))
        throw std::runtime_error(std::string(what) +
                                 ": imaginary residue " + std::to_string(iw));
    return real_part(u);
}

RealField abs2(const ComplexField& u) {
    RealField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = std::norm(u.v[i]);
    return out;
}

ComplexField conj(const ComplexField& u) {
    ComplexField out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = std::conj(u.v[i]);
    return out;
}

double max_abs(const RealField& u) {
    double m = 0.0;
    for (double x : u.v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs(const ComplexField& u) {
    double m = 0.0;
    for (const cplx& z : u.v) m = std::max(m, std::abs(z));
    return m;
}

double integral(const RealField& u) {
    double s = 0.0;
    for (double x : u.v) s += x;
    return u.grid.cell_volume() * s;
}

#define WKB_BINOP(T, OP)                                        \
    T operator OP(const T& a, const T& b) {                     \
        require_same_grid(a.grid, b.grid, "field op");          \
        T out(a.grid);                                          \
        for (std::size_t i = 0; i < a.size(); ++i)              \
            out.v[i] = a.v[i] OP b.v[i];                        \
        return out;                                             \
    }

WKB_BINOP(RealField, +)
WKB_BINOP(RealField, -)
WKB_BINOP(RealField, *)
WKB_BINOP(ComplexField, +)
WKB_BINOP(ComplexField, -)
WKB_BINOP(ComplexField, *)
#undef WKB_BINOP

RealField operator*(double s, const RealField& a) {
    RealField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.v[i] = s * a.v[i];
    return out;
}

ComplexField operator*(cplx s, const ComplexField& a) {
    ComplexField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.v[i] = s * a.v[i];
    return out;
}

ComplexField operator*(const RealField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "field op");
    ComplexField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.v[i] = a.v[i] * b.v[i];
    return out;
}

RealField& operator+=(RealField& a, const RealField& b) {
    require_same_grid(a.grid, b.grid, "field op");
    for (std::size_t i = 0; i < a.size(); ++i) a.v[i] += b.v[i];
    return a;
}

RealField& operator-=(RealField& a, const RealField& b) {
    require_same_grid(a.grid, b.grid, "field op");
    for (std::size_t i = 0; i < a.size(); ++i) a.v[i] -= b.v[i];
    return a;
}

ComplexField& operator+=(ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "field op");
    for (std::size_t i = 0; i < a.size(); ++i) a.v[i] += b.v[i];
    return a;
}

ComplexField& operator-=(ComplexField& a, const ComplexField& b) {
    require_same_grid(a.grid, b.grid, "field op");
    for (std::size_t i = 0; i < a.size(); ++i) a.v[i] -= b.v[i];
    return a;
}

void axpy(RealField& y, double s, const RealField& x) {
    require_same_grid(y.grid, x.grid, "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += s * x.v[i];
}

void axpy(ComplexField& y, cplx s, const ComplexField& x) {
    require_same_grid(y.grid, x.grid, "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += s * x.v[i];
}

// ---- spectral calculus ----------------------------------------------------

ComplexField spectral_derivative(const ComplexField& u, std::array<int, 3> order) {
    const Grid& g = u.grid;
    for (int a = 0; a < 3; ++a)
        if (order[a] < 0 || (a >= g.dim() && order[a] != 0))
            throw std::invalid_argument("spectral_derivative: bad multi-index");
    ComplexField hat = fft_forward(u);
    for_each_mode(g, [&](std::size_t flat, const std::array<double, 3>& xi,
                         const std::array<bool, 3>& nyq) {
        cplx m = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            if (order[a] == 0) continue;
            if (nyq[a] && (order[a] % 2 != 0)) {
                m = 0.0;
                break;
            }
            m *= std::pow(cplx(0.0, xi[a]), order[a]);
        }
        hat.v[flat] *= m;
    });
    return fft_inverse(hat);
}

RealField spectral_derivative(const RealField& u, std::array<int, 3> order) {
    return real_part(spectral_derivative(to_complex(u), order));
}

namespace {

// One forward transform, then one inverse per requested multiplier.
template <typename Multiplier>
ComplexField apply_multiplier(const ComplexField& hat, Multiplier&& m) {
    ComplexField work(hat.grid);
    for_each_mode(hat.grid, [&](std::size_t flat, const std::array<double, 3>& xi,
                                const std::array<bool, 3>& nyq) {
        work.v[flat] = hat.v[flat] * m(xi, nyq);
    });
    return fft_inverse(work);
}

}  // namespace

std::vector<ComplexField> gradient(const ComplexField& u) {
    const Grid& g = u.grid;
    ComplexField hat = fft_forward(u);
    std::vector<ComplexField> out;
    out.reserve(g.dim());
    for (int a = 0; a < g.dim(); ++a) {
        out.push_back(apply_multiplier(hat, [a](const std::array<double, 3>& xi,
                                                const std::array<bool, 3>& nyq) {
            return nyq[a] ? cplx(0.0) : cplx(0.0, xi[a]);
        }));
    }
    return out;
}

std::vector<RealField> gradient(const RealField& u) {
    auto gc = gradient(to_complex(u));
    std::vector<RealField> out;
    out.reserve(gc.size());
    for (auto& c : gc) out.push_back(real_part(c));
    return out;
}

ComplexField laplacian(const ComplexField& u) {
    ComplexField hat = fft_forward(u);
    return apply_multiplier(hat, [](const std::array<double, 3>& xi,
                                    const std::array<bool, 3>&) {
        double s = 0.0;
        for (double x : xi) s += x * x;
        return cplx(-s);
    });
}

RealField laplacian(const RealField& u) {
    return real_part(laplacian(to_complex(u)));
}

RealField divergence(const std::vector<RealField>& w) {
    if (w.empty()) throw std::invalid_argument("divergence: empty vector field");
    const Grid& g = w[0].grid;
    if (static_cast<int>(w.size()) != g.dim())
        throw std::invalid_argument("divergence: component count != dim");
    RealField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        std::array<int, 3> order{0, 0, 0};
        order[a] = 1;
        out += spectral_derivative(w[a], order);
    }
    return out;
}

ComplexField dealias_23(const ComplexField& u) {
    const Grid& g = u.grid;
    ComplexField hat = fft_forward(u);
    for_each_mode(g, [&](std::size_t flat, const std::array<double, 3>&,
                         const std::array<bool, 3>&) {
        auto idx = g.unravel(flat);
        for (int a = 0; a < g.dim(); ++a) {
            const int N = g.n(a);
            const int k = idx[a] < N / 2 ? idx[a] : idx[a] - N;
            if (3 * std::abs(k) > N) {
                hat.v[flat] = 0.0;
                return;
            }
        }
    });
    return fft_inverse(hat);
}

RealField dealias_23(const RealField& u) {
    return real_part(dealias_23(to_complex(u)));
}

// ---- norms ----------------------------------------------------------------

NormKind NormKind::Hs(double s) {
    if (s < 0) throw std::invalid_argument("NormKind::Hs: s must be >= 0");
    return {Kind::Hs, s, 0, 1};
}

NormKind NormKind::H1eps(double eps) {
    if (!(eps > 0)) throw std::invalid_argument("NormKind::H1eps: eps must be > 0");
    return {Kind::H1eps, 0, 0, eps};
}

NormKind NormKind::SigmaEps(int k, double eps) {
    if (k < 0) throw std::invalid_argument("NormKind::SigmaEps: k must be >= 0");
    if (!(eps > 0)) throw std::invalid_argument("NormKind::SigmaEps: eps must be > 0");
    return {Kind::SigmaEps, 0, k, eps};
}

namespace {

double l2_phys(const ComplexField& u) {
    double s = 0.0;
    for (const cplx& z : u.v) s += std::norm(z);
    return std::sqrt(u.grid.cell_volume() * s);
}

// sqrt( cellvol * sum w(xi) |uhat|^2 ), the quadrature-weighted Plancherel sum
template <typename W>
double weighted_spectral(const ComplexField& u, W&& w) {
    ComplexField hat = fft_forward(u);
    double s = 0.0;
    for_each_mode(u.grid, [&](std::size_t flat, const std::array<double, 3>& xi,
                              const std::array<bool, 3>&) {
        double xi2 = 0.0;
        for (double x : xi) xi2 += x * x;
        s += w(xi2) * std::norm(hat.v[flat]);
    });
    return std::sqrt(u.grid.cell_volume() * s);
}

double moment_weight(const ComplexField& u, int k) {
    const Grid& g = u.grid;
    double s = 0.0;
    std::size_t flat = 0;
    for (int i0 = 0; i0 < (g.dim() > 0 ? g.n(0) : 1); ++i0) {
        double x0 = g.coord(0, i0);
        for (int i1 = 0; i1 < (g.dim() > 1 ? g.n(1) : 1); ++i1) {
            double x1 = g.dim() > 1 ? g.coord(1, i1) : 0.0;
            for (int i2 = 0; i2 < (g.dim() > 2 ? g.n(2) : 1); ++i2) {
                double x2 = g.dim() > 2 ? g.coord(2, i2) : 0.0;
                double r2 = x0 * x0 + x1 * x1 + x2 * x2;
                s += std::pow(r2, k) * std::norm(u.v[flat++]);
            }
        }
    }
    return std::sqrt(g.cell_volume() * s);
}

}  // namespace

double norm(const ComplexField& u, const NormKind& kind) {
    using K = NormKind::Kind;
    switch (kind.kind) {
        case K::L1: {
            double s = 0.0;
            for (const cplx& z : u.v) s += std::abs(z);
            return u.grid.cell_volume() * s;
        }
        case K::L2:
            return l2_phys(u);
        case K::Linf:
            return max_abs(u);
        case K::Hs:
            return weighted_spectral(
                u, [s = kind.s](double xi2) { return std::pow(1.0 + xi2, s); });
        case K::H1eps:
            return l2_phys(u) +
                   kind.eps * weighted_spectral(u, [](double xi2) { return xi2; });
        case K::SigmaEps:
            return l2_phys(u) + moment_weight(u, kind.k) +
                   weighted_spectral(u, [k = kind.k, e = kind.eps](double xi2) {
                       return std::pow(e * e * xi2, k);
                   });
    }
    throw std::logic_error("norm: unknown kind");
}

double norm(const RealField& u, const NormKind& kind) {
    using K = NormKind::Kind;
    switch (kind.kind) {
        case K::L1: {
            double s = 0.0;
            for (double x : u.v) s += std::abs(x);
            return u.grid.cell_volume() * s;
        }
        case K::Linf:
            return max_abs(u);
        default:
            return norm(to_complex(u), kind);
    }
}

double norm(const std::vector<RealField>& w, const NormKind& kind) {
    double s = 0.0;
    for (const RealField& c : w) {
        double n = norm(c, kind);
        s += n * n;
    }
    return std::sqrt(s);
}

// ---- serialization --------------------------------------------------------

namespace {

std::string join_csv_int(const Grid& g, int (Grid::*get)(int) const) {
    std::ostringstream os;
    for (int a = 0; a < g.dim(); ++a) {
        if (a) os << ',';
        os << (g.*get)(a);
    }
    return os.str();
}

std::string join_csv_double(const Grid& g, double (Grid::*get)(int) const) {
    std::ostringstream os;
    os.precision(17);
    for (int a = 0; a < g.dim(); ++a) {
        if (a) os << ',';
        os << (g.*get)(a);
    }
    return os.str();
}

void write_header(std::ostream& os, const Grid& g, bool is_complex) {
    os << "FLD1 " << (is_complex ? "complex" : "real") << " d=" << g.dim()
       << " N=" << join_csv_int(g, &Grid::n)
       << " L=" << join_csv_double(g, &Grid::length)
       << " xmin=" << join_csv_double(g, &Grid::xmin) << '\n';
}

// payload assumes a little-endian host (checked once)
void require_little_endian() {
    const std::uint16_t probe = 1;
    if (*reinterpret_cast<const std::uint8_t*>(&probe) != 1)
        throw std::runtime_error("fld1: little-endian host required");
}

template <typename T>
void write_payload(std::ostream& os, const std::vector<T>& v) {
    require_little_endian();
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(T)));
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

struct Header {
    bool is_complex = false;
    Grid grid;
};

Header parse_header(std::istream& is, const std::string& path) {
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("fld1: cannot read header of " + path);
    std::istringstream ls(line);
    std::string magic, kind, d_tok, n_tok, l_tok, x_tok;
    ls >> magic >> kind >> d_tok >> n_tok >> l_tok >> x_tok;
    if (magic != "FLD1" || (kind != "real" && kind != "complex"))
        throw std::runtime_error("fld1: bad header in " + path);
    auto field = [&](std::string tok, const char* key) {
        const std::string prefix = std::string(key) + "=";
        if (tok.rfind(prefix, 0) != 0)
            throw std::runtime_error("fld1: expected " + prefix + " in " + path);
        return tok.substr(prefix.size());
    };
    int d = std::stoi(field(d_tok, "d"));
    auto nd = split_doubles(field(n_tok, "N"));
    auto ld = split_doubles(field(l_tok, "L"));
    auto xd = split_doubles(field(x_tok, "xmin"));
    std::vector<int> n(nd.size());
    std::transform(nd.begin(), nd.end(), n.begin(),
                   [](double x) { return static_cast<int>(x); });
    Header h;
    h.is_complex = kind == "complex";
    h.grid = Grid::make(d, n, ld, xd);
    return h;
}

}  // namespace

void write_fld1(const std::string& path, const RealField& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("fld1: cannot open " + path);
    write_header(os, u.grid, false);
    write_payload(os, u.v);
    if (!os) throw std::runtime_error("fld1: write failed for " + path);
}

void write_fld1(const std::string& path, const ComplexField& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("fld1: cannot open " + path);
    write_header(os, u.grid, true);
    write_payload(os, u.v);
    if (!os) throw std::runtime_error("fld1: write failed for " + path);
}

std::variant<RealField, ComplexField> read_fld1(const std::string& path) {
    require_little_endian();
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("fld1: cannot open " + path);
    Header h = parse_header(is, path);
    const std::size_t total = h.grid.size();
    if (h.is_complex) {
        ComplexField f(h.grid);
        is.read(reinterpret_cast<char*>(f.v.data()),
                static_cast<std::streamsize>(total * sizeof(cplx)));
        if (static_cast<std::size_t>(is.gcount()) != total * sizeof(cplx))
            throw std::runtime_error("fld1: truncated payload in " + path);
        return f;
    }
    RealField f(h.grid);
    is.read(reinterpret_cast<char*>(f.v.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != total * sizeof(double))
        throw std::runtime_error("fld1: truncated payload in " + path);
    return f;
}

RealField read_fld1_real(const std::string& path) {
    auto v = read_fld1(path);
    if (auto* f = std::get_if<RealField>(&v)) return std::move(*f);
    throw std::runtime_error("fld1: " + path + " holds a complex field");
}

ComplexField read_fld1_complex(const std::string& path) {
    auto v = read_fld1(path);
    if (auto* f = std::get_if<ComplexField>(&v)) return std::move(*f);
    throw std::runtime_error("fld1: " + path + " holds a real field");
}

}  // namespace wkbsplit
