#pragma once

// Angular-momentum algebra for a degenerate two-level transition g -> e.
//
// Conventions used throughout the library:
//  * Condon-Shortley phases for Clebsch-Gordan coefficients.
//  * Spherical unit vectors e_{+1} = -(x + i y)/sqrt(2), e_0 = z,
//    e_{-1} = (x - i y)/sqrt(2). A polarization is stored by its
//    components c_q = e_q^* . v, indexed q = -1, 0, +1.
//  * Sublevels of each manifold are ordered by ascending m (m = -F ... +F).
//  * The reduced dipole matrix element is 1; Q^q_ge is normalized so that
//    sum_q Q^q_eg Q^q_ge is the identity on the excited manifold.

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "dtls/half_integer.hpp"

namespace dtls {

using cplx = std::complex<double>;

// Clebsch-Gordan coefficient <F1 m1; F2 m2 | F m>.
// Returns 0 when m1 + m2 != m or the triangle rule fails. Throws
// std::invalid_argument for |m_i| > F_i, negative F, or parity mismatches
// between an F and its projection.
double clebsch_gordan(HalfInt f1, HalfInt m1, HalfInt f2, HalfInt m2, HalfInt f, HalfInt m);
double clebsch_gordan(double f1, double m1, double f2, double m2, double f, double m);

struct AtomicTransition {
    HalfInt Fg;
    HalfInt Fe;
    double gamma = 1.0; // excited-state decay rate; sets the frequency unit
    double g_g = 0.0;   // gyromagnetic factors (informational; the engine uses Larmor rates)
    double g_e = 0.0;

    // Validates the dipole selection rule and gamma > 0.
    static AtomicTransition make(double Fg, double Fe, double gamma = 1.0,
                                 double g_g = 0.0, double g_e = 0.0);
    void validate() const;

    int dg() const { return multiplicity(Fg); }
    int de() const { return multiplicity(Fe); }
    int dim() const { return dg() + de(); }

    double mg(int index) const { return -Fg.value() + index; }
    double me(int index) const { return -Fe.value() + index; }

    bool operator==(const AtomicTransition&) const = default;
};

enum class Manifold { ground, excited };

struct OperatorMatrix {
    Manifold rows = Manifold::ground;
    Manifold cols = Manifold::excited;
    Eigen::MatrixXcd m;

    OperatorMatrix adjoint() const { return {cols, rows, m.adjoint()}; }
};

class Polarization {
public:
    // Linear x polarization by default.
    Polarization();

    // Components (c_{-1}, c_0, c_{+1}); must be normalized to 1e-12.
    static Polarization from_spherical(const std::array<cplx, 3>& c);
    // Any nonzero Cartesian vector; normalized on the way in.
    static Polarization from_cartesian(const std::array<cplx, 3>& v);

    static Polarization sigma_plus();
    static Polarization sigma_minus();
    static Polarization linear_x();
    static Polarization linear_y();
    static Polarization linear_z();

    // Component for q in {-1, 0, +1}.
    cplx component(int q) const { return c_[static_cast<std::size_t>(q + 1)]; }
    const std::array<cplx, 3>& components() const { return c_; }
    std::array<cplx, 3> to_cartesian() const;

    // Multiplies every component by exp(i phase).
    Polarization rotated_phase(double phase) const;

    bool operator==(const Polarization&) const = default;

private:
    std::array<cplx, 3> c_;
};

// Spherical components of a Cartesian vector (normalized). Throws on zero.
Polarization cartesian_to_spherical(const std::array<cplx, 3>& v);
std::array<cplx, 3> spherical_to_cartesian(const Polarization& pol);

// Q^q_ge for q = -1, 0, +1 (array index q + 1). Element (mg, me) equals
// <Fg mg; 1 q | Fe me>, so Q^q_ge is nonzero only for me = mg + q.
std::array<OperatorMatrix, 3> lowering_operators(const AtomicTransition& t);

// sum_q c_q Q^q_ge: the dimensionless e.Q_ge entering the field coupling
// E e.D_ge + h.c. The same map is used for pump and probe.
OperatorMatrix dipole_coupling(const AtomicTransition& t, const Polarization& pol);

} // namespace dtls
