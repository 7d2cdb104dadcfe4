#include "obsplan/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace obsplan {

void LtiSystem::validate() const {
    if (A.rows() != A.cols()) throw std::invalid_argument("LtiSystem: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("LtiSystem: B row count mismatch");
    if (C.cols() != A.cols()) throw std::invalid_argument("LtiSystem: C column count mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("LtiSystem: dt must be positive");
}

void Trajectory::validate() const {
    if (states.size() != inputs.size() + 1) {
        throw std::invalid_argument("Trajectory: need len(states) == len(inputs) + 1");
    }
}

double Trajectory::dynamics_residual(const LtiSystem& sys) const {
    validate();
    double worst = 0.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        const double r = (states[t + 1] - sys.A * states[t] - sys.B * inputs[t]).norm();
        if (r > worst) worst = r;
    }
    return worst;
}

Trajectory rollout(const LtiSystem& sys, const Vector& x0,
                   const std::vector<Vector>& inputs) {
    sys.validate();
    if (x0.size() != sys.nx()) throw std::invalid_argument("rollout: x0 dimension mismatch");
    Trajectory traj;
    traj.states.reserve(inputs.size() + 1);
    traj.inputs = inputs;
    traj.states.push_back(x0);
    for (const Vector& u : inputs) {
        if (u.size() != sys.nu()) throw std::invalid_argument("rollout: input dimension mismatch");
        traj.states.push_back(sys.A * traj.states.back() + sys.B * u);
    }
    traj.dynamically_consistent = true;
    return traj;
}

LtiSystem double_integrator_2d(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("double_integrator_2d: dt must be positive");
    LtiSystem sys;
    sys.dt = dt;
    sys.A = Matrix::Identity(4, 4);
    sys.A(0, 2) = dt;
    sys.A(1, 3) = dt;
    sys.B = Matrix::Zero(4, 2);
    sys.B(0, 0) = 0.5 * dt * dt;
    sys.B(1, 1) = 0.5 * dt * dt;
    sys.B(2, 0) = dt;
    sys.B(3, 1) = dt;
    sys.C = Matrix::Zero(2, 4);
    sys.C(0, 0) = 1.0;
    sys.C(1, 1) = 1.0;
    return sys;
}

double mean_motion(double mu, double semi_major_axis) {
    if (!(mu > 0.0) || !(semi_major_axis > 0.0)) {
        throw std::invalid_argument("mean_motion: mu and semi-major axis must be positive");
    }
    return std::sqrt(mu / (semi_major_axis * semi_major_axis * semi_major_axis));
}

namespace {

// 1 - cos(x) without cancellation.
double one_minus_cos(double x) { return 2.0 * std::sin(0.5 * x) * std::sin(0.5 * x); }

// x - sin(x); series branch for small arguments.
double x_minus_sin(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return x * x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return x - std::sin(x);
}

// 4 (1 - cos(x)) - 1.5 x^2; series branch for small arguments.
double cw_curvature_term(double x) {
    if (std::abs(x) < 1e-3) {
        const double x2 = x * x;
        return x2 * (0.5 - x2 / 6.0 + x2 * x2 / 180.0);
    }
    return 4.0 * one_minus_cos(x) - 1.5 * x * x;
}

}  // namespace

LtiSystem cw_system(double n, double dt) {
    if (!(n > 0.0)) throw std::invalid_argument("cw_system: mean motion must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("cw_system: dt must be positive");

    const double nt = n * dt;
    const double c = std::cos(nt);
    const double s = std::sin(nt);
    const double omc = one_minus_cos(nt);
    const double xms = x_minus_sin(nt);

    LtiSystem sys;
    sys.dt = dt;
    Matrix A = Matrix::Zero(6, 6);
    A(0, 0) = 4.0 - 3.0 * c;
    A(0, 3) = s / n;
    A(0, 4) = 2.0 * omc / n;
    A(1, 0) = -6.0 * xms;
    A(1, 1) = 1.0;
    A(1, 3) = -2.0 * omc / n;
    A(1, 4) = (s - 3.0 * xms) / n;
    A(2, 2) = c;
    A(2, 5) = s / n;
    A(3, 0) = 3.0 * n * s;
    A(3, 3) = c;
    A(3, 4) = 2.0 * s;
    A(4, 0) = -6.0 * n * omc;
    A(4, 3) = -2.0 * s;
    A(4, 4) = 1.0 - 4.0 * omc;
    A(5, 2) = -n * s;
    A(5, 5) = c;
    sys.A = A;

    // B = integral of Phi(s) over [0, dt] applied to the acceleration rows;
    // each entry is the closed-form integral of the matching STM entry.
    const double n2 = n * n;
    Matrix B = Matrix::Zero(6, 3);
    B(0, 0) = omc / n2;
    B(0, 1) = 2.0 * xms / n2;
    B(1, 0) = -2.0 * xms / n2;
    B(1, 1) = cw_curvature_term(nt) / n2;
    B(2, 2) = omc / n2;
    B(3, 0) = s / n;
    B(3, 1) = 2.0 * omc / n;
    B(4, 0) = -2.0 * omc / n;
    B(4, 1) = (s - 3.0 * xms) / n;
    B(5, 2) = s / n;
    sys.B = B;

    sys.C = Matrix::Zero(3, 6);
    sys.C(0, 0) = 1.0;
    sys.C(1, 1) = 1.0;
    sys.C(2, 2) = 1.0;
    return sys;
}

std::vector<Matrix> finite_horizon_lqr(const LtiSystem& sys, const Matrix& Q,
                                       const Matrix& R, const Matrix& Qf, int T) {
    sys.validate();
    if (T < 1) throw std::invalid_argument("finite_horizon_lqr: horizon must be >= 1");
    const int nx = sys.nx();
    const int nu = sys.nu();
    if (Q.rows() != nx || Q.cols() != nx || Qf.rows() != nx || Qf.cols() != nx ||
        R.rows() != nu || R.cols() != nu) {
        throw std::invalid_argument("finite_horizon_lqr: weight dimension mismatch");
    }
    Eigen::LLT<Matrix> r_chol(R);
    if (r_chol.info() != Eigen::Success) {
        throw std::invalid_argument("finite_horizon_lqr: R must be positive definite");
    }

    std::vector<Matrix> gains(T);
    Matrix P = 0.5 * (Qf + Qf.transpose());
    for (int t = T - 1; t >= 0; --t) {
        const Matrix BtP = sys.B.transpose() * P;
        const Matrix S = R + BtP * sys.B;
        const Matrix K = S.ldlt().solve(BtP * sys.A);
        P = Q + sys.A.transpose() * P * sys.A - sys.A.transpose() * P * sys.B * K;
        P = 0.5 * (P + P.transpose());
        gains[t] = K;
    }
    return gains;
}

double quadratic_cost(const Trajectory& traj, const Matrix& Q, const Matrix& R,
                      const Matrix& Qf, const Vector& goal) {
    traj.validate();
    double cost = 0.0;
    const int T = traj.horizon();
    for (int k = 0; k < T; ++k) {
        const Vector dx = traj.states[k] - goal;
        cost += dx.dot(Q * dx) + traj.inputs[k].dot(R * traj.inputs[k]);
    }
    const Vector dxT = traj.states[T] - goal;
    cost += dxT.dot(Qf * dxT);
    return cost;
}

}  // namespace obsplan
