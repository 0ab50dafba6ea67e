#include "dtls/angular.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dtls {

HalfInt HalfInt::from_double(double value) {
    const double twice = 2.0 * value;
    const double rounded = std::round(twice);
    if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9) {
        throw std::invalid_argument("not a half-integer: " + std::to_string(value));
    }
    return from_twice(static_cast<int>(rounded));
}

std::string HalfInt::to_string() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
}

namespace {

constexpr int kMaxFactorial = 40;

// n! in extended precision; exact through 25!.
const std::array<long double, kMaxFactorial + 1>& factorials() {
    static const auto table = [] {
        std::array<long double, kMaxFactorial + 1> f{};
        f[0] = 1.0L;
        for (int n = 1; n <= kMaxFactorial; ++n) f[n] = f[n - 1] * static_cast<long double>(n);
        return f;
    }();
    return table;
}

long double fact(int n) {
    if (n < 0 || n > kMaxFactorial) throw std::out_of_range("factorial argument out of range");
    return factorials()[static_cast<std::size_t>(n)];
}

void check_projection(HalfInt f, HalfInt m, const char* what) {
    if (f.twice() < 0) throw std::invalid_argument(std::string(what) + ": negative angular momentum");
    if ((f.twice() - m.twice()) % 2 != 0) {
        throw std::invalid_argument(std::string(what) + ": integer/half-integer mismatch between F and m");
    }
    if (std::abs(m.twice()) > f.twice()) throw std::invalid_argument(std::string(what) + ": |m| > F");
}

} // namespace

double clebsch_gordan(HalfInt f1, HalfInt m1, HalfInt f2, HalfInt m2, HalfInt f, HalfInt m) {
    check_projection(f1, m1, "clebsch_gordan(F1, m1)");
    check_projection(f2, m2, "clebsch_gordan(F2, m2)");
    check_projection(f, m, "clebsch_gordan(F, m)");
    if ((f1.twice() + f2.twice() + f.twice()) % 2 != 0) {
        throw std::invalid_argument("clebsch_gordan: F1 + F2 + F must be an integer");
    }
    if (m1.twice() + m2.twice() != m.twice()) return 0.0;
    if (f.twice() < std::abs(f1.twice() - f2.twice()) || f.twice() > f1.twice() + f2.twice()) return 0.0;

    // Integer arguments of the Racah sum (all twice-values are even here).
    const int j1 = f1.twice(), j2 = f2.twice(), j = f.twice();
    const int a = (j1 + j2 - j) / 2;
    const int b = (j1 - m1.twice()) / 2;
    const int c = (j2 + m2.twice()) / 2;
    const int d = (j - j2 + m1.twice()) / 2;
    const int e = (j - j1 - m2.twice()) / 2;

    const long double pre =
        static_cast<long double>(j + 1) * fact((j + j1 - j2) / 2) * fact((j - j1 + j2) / 2) * fact(a) /
        fact((j1 + j2 + j) / 2 + 1);
    const long double norm = fact((j + m.twice()) / 2) * fact((j - m.twice()) / 2) *
                             fact((j1 - m1.twice()) / 2) * fact((j1 + m1.twice()) / 2) *
                             fact((j2 - m2.twice()) / 2) * fact((j2 + m2.twice()) / 2);

    const int kmin = std::max({0, -d, -e});
    const int kmax = std::min({a, b, c});
    long double sum = 0.0L;
    for (int k = kmin; k <= kmax; ++k) {
        const long double term =
            1.0L / (fact(k) * fact(a - k) * fact(b - k) * fact(c - k) * fact(d + k) * fact(e + k));
        sum += (k % 2 == 0) ? term : -term;
    }
    return static_cast<double>(std::sqrt(pre * norm) * sum);
}

double clebsch_gordan(double f1, double m1, double f2, double m2, double f, double m) {
    return clebsch_gordan(HalfInt::from_double(f1), HalfInt::from_double(m1), HalfInt::from_double(f2),
                          HalfInt::from_double(m2), HalfInt::from_double(f), HalfInt::from_double(m));
}

AtomicTransition AtomicTransition::make(double Fg, double Fe, double gamma, double g_g, double g_e) {
    AtomicTransition t{HalfInt::from_double(Fg), HalfInt::from_double(Fe), gamma, g_g, g_e};
    t.validate();
    return t;
}

void AtomicTransition::validate() const {
    if (Fg.twice() < 0 || Fe.twice() < 0) throw std::invalid_argument("angular momenta must be non-negative");
    if ((Fg.twice() - Fe.twice()) % 2 != 0) {
        throw std::invalid_argument("Fg and Fe must both be integer or both half-integer");
    }
    if (std::abs(Fe.twice() - Fg.twice()) > 2) throw std::invalid_argument("dipole transition requires |Fe - Fg| <= 1");
    if (Fg.twice() == 0 && Fe.twice() == 0) throw std::invalid_argument("Fg = Fe = 0 is dipole forbidden");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
}

namespace {

constexpr double kNormTolerance = 1e-12;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

} // namespace

Polarization::Polarization() : c_{cplx(kInvSqrt2, 0.0), cplx(0.0, 0.0), cplx(-kInvSqrt2, 0.0)} {}

Polarization Polarization::from_spherical(const std::array<cplx, 3>& c) {
    const double n2 = std::norm(c[0]) + std::norm(c[1]) + std::norm(c[2]);
    if (std::abs(n2 - 1.0) > kNormTolerance) {
        throw std::invalid_argument("polarization components are not normalized");
    }
    Polarization p;
    p.c_ = c;
    return p;
}

Polarization Polarization::from_cartesian(const std::array<cplx, 3>& v) {
    const double n2 = std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
    if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::invalid_argument("polarization vector must be nonzero");
    const double s = 1.0 / std::sqrt(n2);
    const cplx i(0.0, 1.0);
    Polarization p;
    p.c_[0] = s * (v[0] + i * v[1]) * kInvSqrt2;  // e_{-1}^* . v
    p.c_[1] = s * v[2];                           // e_0^* . v
    p.c_[2] = -s * (v[0] - i * v[1]) * kInvSqrt2; // e_{+1}^* . v
    return p;
}

Polarization Polarization::sigma_plus() { return from_spherical({cplx{}, cplx{}, cplx(1.0, 0.0)}); }
Polarization Polarization::sigma_minus() { return from_spherical({cplx(1.0, 0.0), cplx{}, cplx{}}); }
Polarization Polarization::linear_x() { return from_cartesian({cplx(1.0), cplx{}, cplx{}}); }
Polarization Polarization::linear_y() { return from_cartesian({cplx{}, cplx(1.0), cplx{}}); }
Polarization Polarization::linear_z() { return from_cartesian({cplx{}, cplx{}, cplx(1.0)}); }

std::array<cplx, 3> Polarization::to_cartesian() const {
    // v = sum_q c_q e_q
    const cplx i(0.0, 1.0);
    const cplx cm = c_[0], c0 = c_[1], cp = c_[2];
    return {(cm - cp) * kInvSqrt2, -i * (cm + cp) * kInvSqrt2, c0};
}

Polarization Polarization::rotated_phase(double phase) const {
    const cplx f = std::polar(1.0, phase);
    Polarization p = *this;
    for (auto& c : p.c_) c *= f;
    return p;
}

Polarization cartesian_to_spherical(const std::array<cplx, 3>& v) { return Polarization::from_cartesian(v); }

std::array<cplx, 3> spherical_to_cartesian(const Polarization& pol) { return pol.to_cartesian(); }

std::array<OperatorMatrix, 3> lowering_operators(const AtomicTransition& t) {
    t.validate();
    const int dg = t.dg(), de = t.de();
    const HalfInt one = HalfInt::from_twice(2);
    std::array<OperatorMatrix, 3> q_ops;
    for (int q = -1; q <= 1; ++q) {
        OperatorMatrix op{Manifold::ground, Manifold::excited, Eigen::MatrixXcd::Zero(dg, de)};
        for (int ig = 0; ig < dg; ++ig) {
            const HalfInt mg = HalfInt::from_twice(-t.Fg.twice() + 2 * ig);
            const HalfInt me = mg + HalfInt::from_twice(2 * q);
            if (std::abs(me.twice()) > t.Fe.twice()) continue;
            const int ie = (me.twice() + t.Fe.twice()) / 2;
            op.m(ig, ie) = clebsch_gordan(t.Fg, mg, one, HalfInt::from_twice(2 * q), t.Fe, me);
        }
        q_ops[static_cast<std::size_t>(q + 1)] = std::move(op);
    }
    return q_ops;
}

OperatorMatrix dipole_coupling(const AtomicTransition& t, const Polarization& pol) {
    const auto q_ops = lowering_operators(t);
    OperatorMatrix out{Manifold::ground, Manifold::excited, Eigen::MatrixXcd::Zero(t.dg(), t.de())};
    for (int q = -1; q <= 1; ++q) out.m += pol.component(q) * q_ops[static_cast<std::size_t>(q + 1)].m;
    return out;
}

} // namespace dtls
