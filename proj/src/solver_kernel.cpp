#include "obsplan/solver_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace obsplan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Vector project_ball(const Vector& v, double radius) {
    if (radius < 0.0) throw std::invalid_argument("project_ball: radius must be >= 0");
    const double n = v.norm();
    if (n <= radius) return v;
    if (n == 0.0) return v;
    return v * (radius / n);
}

Vector project_affine(const Vector& v, const Matrix& A, const Vector& b) {
    if (A.cols() != v.size() || A.rows() != b.size()) {
        throw std::invalid_argument("project_affine: dimension mismatch");
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A.transpose());
    if (qr.rank() < A.rows()) {
        std::ostringstream msg;
        msg << "project_affine: A is rank deficient (rank " << qr.rank() << " of "
            << A.rows() << " rows)";
        throw std::invalid_argument(msg.str());
    }
    const Matrix gram = A * A.transpose();
    const Vector correction = gram.ldlt().solve(A * v - b);
    return v - A.transpose() * correction;
}

DykstraResult dykstra(const Vector& v, const std::vector<Projection>& projections,
                      int max_iters, double tol) {
    if (projections.empty()) {
        throw std::invalid_argument("dykstra: need at least one projection");
    }
    const auto m = projections.size();
    Vector x = v;
    std::vector<Vector> increments(m, Vector::Zero(v.size()));
    DykstraResult result;
    for (int sweep = 0; sweep < max_iters; ++sweep) {
        const Vector sweep_start = x;
        for (std::size_t i = 0; i < m; ++i) {
            const Vector y = projections[i](x + increments[i]);
            increments[i] = x + increments[i] - y;
            x = y;
        }
        result.iterations = sweep + 1;
        if ((x - sweep_start).norm() <= tol) {
            result.converged = true;
            break;
        }
    }
    result.point = x;
    return result;
}

void Qp::validate() const {
    const int n = num_vars();
    if (H.rows() != n || H.cols() != n) throw std::invalid_argument("Qp: H must be square");
    if (g.size() != n) throw std::invalid_argument("Qp: g size mismatch");
    const double scale = 1.0 + H.cwiseAbs().maxCoeff();
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("Qp: H must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw std::invalid_argument("Qp: H must be positive semidefinite");
    }
    if (A_eq.rows() != b_eq.size()) throw std::invalid_argument("Qp: b_eq size mismatch");
    if (A_eq.rows() > 0 && A_eq.cols() != n) throw std::invalid_argument("Qp: A_eq cols mismatch");
    if (A_in.rows() != lb.size() || A_in.rows() != ub.size()) {
        throw std::invalid_argument("Qp: bounds size mismatch");
    }
    if (A_in.rows() > 0 && A_in.cols() != n) throw std::invalid_argument("Qp: A_in cols mismatch");
    for (Eigen::Index i = 0; i < lb.size(); ++i) {
        if (lb[i] > ub[i]) throw std::invalid_argument("Qp: lb > ub");
    }
    for (const auto& ball : balls) {
        if (ball.D.cols() != n || ball.D.rows() != ball.center.size() || ball.radius < 0.0) {
            throw std::invalid_argument("Qp: malformed ball constraint");
        }
    }
}

namespace {

struct BallRows {
    int offset;
    int size;
    Vector center;  // scaled
    double radius;  // scaled
};

/// Problem data after stacking the constraints and applying Ruiz
/// equilibration: variables x = D xhat, rows scaled by E, cost scaled by c.
struct Scaled {
    int n = 0;
    int m = 0;
    int n_eq = 0;
    int n_in = 0;
    Matrix H;  // scaled
    Vector g;  // scaled
    Matrix K;  // scaled
    Vector low, high;  // scaled; ball rows hold +-inf
    std::vector<BallRows> balls;

    Vector d;        // variable scaling
    Vector e;        // row scaling
    double cost = 1.0;
};

Scaled build_scaled(const Qp& qp) {
    Scaled s;
    s.n = qp.num_vars();
    s.n_eq = static_cast<int>(qp.A_eq.rows());
    s.n_in = static_cast<int>(qp.A_in.rows());
    int ball_rows = 0;
    for (const auto& b : qp.balls) ball_rows += static_cast<int>(b.D.rows());
    s.m = s.n_eq + s.n_in + ball_rows;

    Matrix k(s.m, s.n);
    Vector low(s.m), high(s.m);
    int r = 0;
    if (s.n_eq > 0) {
        k.middleRows(r, s.n_eq) = qp.A_eq;
        low.segment(r, s.n_eq) = qp.b_eq;
        high.segment(r, s.n_eq) = qp.b_eq;
        r += s.n_eq;
    }
    if (s.n_in > 0) {
        k.middleRows(r, s.n_in) = qp.A_in;
        low.segment(r, s.n_in) = qp.lb;
        high.segment(r, s.n_in) = qp.ub;
        r += s.n_in;
    }
    for (const auto& b : qp.balls) {
        const int rows = static_cast<int>(b.D.rows());
        k.middleRows(r, rows) = b.D;
        low.segment(r, rows).setConstant(-kInf);
        high.segment(r, rows).setConstant(kInf);
        s.balls.push_back({r, rows, b.center, b.radius});
        r += rows;
    }

    // Modified Ruiz equilibration on [H K'; K 0] plus cost normalization.
    s.d = Vector::Ones(s.n);
    s.e = Vector::Ones(s.m);
    s.cost = 1.0;
    Matrix h = 0.5 * (qp.H + qp.H.transpose());
    Vector g = qp.g;
    for (int pass = 0; pass < 10; ++pass) {
        Vector dd(s.n), de(s.m);
        for (int j = 0; j < s.n; ++j) {
            double norm = h.col(j).cwiseAbs().maxCoeff();
            if (s.m > 0) norm = std::max(norm, k.col(j).cwiseAbs().maxCoeff());
            dd[j] = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
        }
        if (s.m > 0) {
            for (int i = 0; i < s.m; ++i) {
                const double norm = k.row(i).cwiseAbs().maxCoeff();
                de[i] = norm > 1e-12 ? 1.0 / std::sqrt(norm) : 1.0;
            }
            // A norm constraint needs one uniform scale across its rows.
            for (const auto& ball : s.balls) {
                const double shared = de.segment(ball.offset, ball.size).minCoeff();
                de.segment(ball.offset, ball.size).setConstant(shared);
            }
        }
        h = dd.asDiagonal() * h * dd.asDiagonal();
        g = dd.asDiagonal() * g;
        if (s.m > 0) k = de.asDiagonal() * k * dd.asDiagonal();
        s.d = s.d.cwiseProduct(dd);
        s.e = s.e.cwiseProduct(de);

        double mean_col = 0.0;
        for (int j = 0; j < s.n; ++j) mean_col += h.col(j).cwiseAbs().maxCoeff();
        mean_col /= s.n;
        const double gamma =
            1.0 / std::max({mean_col, g.cwiseAbs().maxCoeff(), 1e-12});
        h *= gamma;
        g *= gamma;
        s.cost *= gamma;
    }
    s.H = h;
    s.g = g;
    s.K = k;
    s.low.resize(s.m);
    s.high.resize(s.m);
    for (int i = 0; i < s.m; ++i) {
        s.low[i] = std::isfinite(low[i]) ? low[i] * s.e[i] : low[i];
        s.high[i] = std::isfinite(high[i]) ? high[i] * s.e[i] : high[i];
    }
    for (auto& ball : s.balls) {
        const double scale = s.e[ball.offset];
        ball.center *= scale;
        ball.radius *= scale;
    }
    return s;
}

Vector project_constraint_set(const Scaled& s, const Vector& v) {
    Vector z = v;
    for (int i = 0; i < s.n_eq + s.n_in; ++i) {
        z[i] = std::min(std::max(v[i], s.low[i]), s.high[i]);
    }
    for (const auto& ball : s.balls) {
        const Vector d = v.segment(ball.offset, ball.size) - ball.center;
        z.segment(ball.offset, ball.size) = ball.center + project_ball(d, ball.radius);
    }
    return z;
}

double support_function(const Scaled& s, const Vector& dy) {
    double val = 0.0;
    for (int i = 0; i < s.n_eq + s.n_in; ++i) {
        if (dy[i] > 0.0) {
            if (s.high[i] >= kInf) return kInf;
            val += s.high[i] * dy[i];
        } else if (dy[i] < 0.0) {
            if (s.low[i] <= -kInf) return kInf;
            val += s.low[i] * dy[i];
        }
    }
    for (const auto& ball : s.balls) {
        const Vector seg = dy.segment(ball.offset, ball.size);
        val += ball.center.dot(seg) + ball.radius * seg.norm();
    }
    return val;
}

struct Residuals {
    double primal_rel = 0.0;
    double dual_rel = 0.0;
};

/// Unscaled relative residuals of the original problem.
Residuals compute_residuals(const Qp& qp, const Scaled& s, const Vector& x,
                            const Vector& z_unscaled, const Vector& y) {
    Residuals r;
    const Vector hx = qp.H * x;
    Vector kx;
    Vector kty = Vector::Zero(x.size());
    double primal = 0.0, pscale = 1.0;
    if (s.m > 0) {
        // s.K = E K D, so K x = E^{-1} (s.K) D^{-1} x and
        // K' y = D^{-1} (s.K)' E^{-1} y.
        kx = s.e.cwiseInverse().cwiseProduct(s.K * s.d.cwiseInverse().cwiseProduct(x));
        kty = s.d.cwiseInverse().cwiseProduct(
            s.K.transpose() * s.e.cwiseInverse().cwiseProduct(y));
        primal = (kx - z_unscaled).cwiseAbs().maxCoeff();
        pscale = std::max({1.0, kx.cwiseAbs().maxCoeff(), z_unscaled.cwiseAbs().maxCoeff()});
    }
    const double dual = (hx + qp.g + kty).cwiseAbs().maxCoeff();
    const double dscale = std::max({1.0, hx.cwiseAbs().maxCoeff(),
                                    qp.g.cwiseAbs().maxCoeff(),
                                    kty.cwiseAbs().maxCoeff()});
    r.primal_rel = primal / pscale;
    r.dual_rel = dual / dscale;
    return r;
}

bool polish_solution(const Qp& qp, const Scaled& s, const Vector& kx_unscaled, Vector& x,
                     Vector& y, double tol) {
    if (!s.balls.empty()) return false;
    std::vector<int> active;
    std::vector<double> active_rhs;
    Vector low(s.m), high(s.m);
    for (int i = 0; i < s.m; ++i) {
        low[i] = std::isfinite(s.low[i]) ? s.low[i] / s.e[i] : s.low[i];
        high[i] = std::isfinite(s.high[i]) ? s.high[i] / s.e[i] : s.high[i];
    }
    for (int i = 0; i < s.n_eq; ++i) {
        active.push_back(i);
        active_rhs.push_back(low[i]);
    }
    const double act_tol = std::sqrt(tol);
    for (int i = s.n_eq; i < s.m; ++i) {
        const double span = std::max(1.0, std::abs(high[i]) == kInf ? 0.0 : std::abs(high[i]));
        if (high[i] < kInf && kx_unscaled[i] > high[i] - act_tol * span && y[i] > 0.0) {
            active.push_back(i);
            active_rhs.push_back(high[i]);
        } else if (low[i] > -kInf && kx_unscaled[i] < low[i] + act_tol * span && y[i] < 0.0) {
            active.push_back(i);
            active_rhs.push_back(low[i]);
        }
    }
    const int n = qp.num_vars();
    const int ma = static_cast<int>(active.size());
    const Matrix k_unscaled =
        s.e.cwiseInverse().asDiagonal() * s.K * s.d.cwiseInverse().asDiagonal();
    Matrix kkt = Matrix::Zero(n + ma, n + ma);
    kkt.topLeftCorner(n, n) = qp.H + 1e-12 * Matrix::Identity(n, n);
    Vector rhs(n + ma);
    rhs.head(n) = -qp.g;
    for (int a = 0; a < ma; ++a) {
        kkt.block(n + a, 0, 1, n) = k_unscaled.row(active[a]);
        kkt.block(0, n + a, n, 1) = k_unscaled.row(active[a]).transpose();
        kkt(n + a, n + a) = -1e-12;
        rhs[n + a] = active_rhs[a];
    }
    Eigen::PartialPivLU<Matrix> lu(kkt);
    Vector sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol);  // one refinement pass
    if (!sol.allFinite()) return false;

    Vector x_new = sol.head(n);
    Vector y_new = Vector::Zero(s.m);
    for (int a = 0; a < ma; ++a) y_new[active[a]] = sol[n + a];

    const Vector kx_new = k_unscaled * x_new;
    for (int i = 0; i < s.m; ++i) {
        const double span = std::max({1.0, std::abs(high[i]) == kInf ? 0.0 : std::abs(high[i]),
                                      std::abs(low[i]) == kInf ? 0.0 : std::abs(low[i])});
        if (kx_new[i] > high[i] + 10 * tol * span) return false;
        if (kx_new[i] < low[i] - 10 * tol * span) return false;
    }
    for (int i = s.n_eq; i < s.m; ++i) {
        if (high[i] - low[i] > 1e-12) {
            if (y_new[i] > 0.0 && high[i] >= kInf) return false;
            if (y_new[i] < 0.0 && low[i] <= -kInf) return false;
        }
    }
    const Residuals before = compute_residuals(qp, s, x, kx_unscaled, y);
    const Residuals after = compute_residuals(qp, s, x_new, kx_new, y_new);
    if (after.primal_rel + after.dual_rel < before.primal_rel + before.dual_rel) {
        x = x_new;
        y = y_new;
        return true;
    }
    return false;
}

}  // namespace

QpSolution solve_qp(const Qp& qp, const QpOptions& opts) {
    qp.validate();
    const int n = qp.num_vars();
    QpSolution sol;

    const Scaled s = build_scaled(qp);
    const int m = s.m;

    if (m == 0) {
        Eigen::LDLT<Matrix> ldlt(qp.H + 1e-12 * Matrix::Identity(n, n));
        sol.x = ldlt.solve(-qp.g);
        sol.y = Vector::Zero(0);
        sol.iterations = 1;
        sol.objective = 0.5 * sol.x.dot(qp.H * sol.x) + qp.g.dot(sol.x);
        sol.stationarity_residual = (qp.H * sol.x + qp.g).cwiseAbs().maxCoeff();
        sol.status = sol.stationarity_residual <= opts.tol * (1.0 + qp.g.cwiseAbs().maxCoeff())
                         ? QpStatus::solved
                         : QpStatus::max_iterations;
        return sol;
    }

    // ADMM with over-relaxation on the scaled problem. Hatted quantities live
    // in the scaled space; rho is per-row with stiffer equality rows.
    double rho_base = opts.rho;
    Vector rho(m);
    auto fill_rho = [&]() {
        for (int i = 0; i < m; ++i) rho[i] = (i < s.n_eq ? 1e3 : 1.0) * rho_base;
    };
    fill_rho();
    const double sigma = opts.sigma;
    const double alpha = 1.6;

    Vector x_hat = Vector::Zero(n);
    Vector y_hat = Vector::Zero(m);
    if (opts.warm_x && opts.warm_x->size() == n) {
        x_hat = s.d.cwiseInverse().cwiseProduct(*opts.warm_x);
    }
    if (opts.warm_y && opts.warm_y->size() == m) {
        y_hat = s.cost * s.e.cwiseInverse().cwiseProduct(*opts.warm_y);
    }
    Vector z_hat = project_constraint_set(s, s.K * x_hat);

    Eigen::LDLT<Matrix> ldlt;
    auto refactor = [&]() {
        Matrix kkt = s.H + sigma * Matrix::Identity(n, n);
        kkt.noalias() += s.K.transpose() * rho.asDiagonal() * s.K;
        ldlt.compute(kkt);
    };
    refactor();

    const int check_interval = 25;
    Vector y_prev = y_hat;
    int it = 0;
    bool infeasible = false;
    auto unscale_x = [&](const Vector& xh) { return Vector(s.d.cwiseProduct(xh)); };
    auto unscale_y = [&](const Vector& yh) {
        return Vector(s.e.cwiseProduct(yh) / s.cost);
    };
    auto unscale_z = [&](const Vector& zh) {
        return Vector(s.e.cwiseInverse().cwiseProduct(zh));
    };

    for (it = 1; it <= opts.max_iters; ++it) {
        Vector rhs = sigma * x_hat - s.g;
        rhs.noalias() += s.K.transpose() * (rho.cwiseProduct(z_hat) - y_hat);
        const Vector x_new = ldlt.solve(rhs);
        const Vector kx = s.K * x_new;
        const Vector relaxed = alpha * kx + (1.0 - alpha) * z_hat;
        const Vector z_new =
            project_constraint_set(s, relaxed + rho.cwiseInverse().cwiseProduct(y_hat));
        y_hat += rho.cwiseProduct(relaxed - z_new);
        x_hat = x_new;
        z_hat = z_new;

        if (it % check_interval == 0) {
            const Vector x_u = unscale_x(x_hat);
            const Vector z_u = unscale_z(z_hat);
            const Vector y_u = unscale_y(y_hat);
            const Residuals r = compute_residuals(qp, s, x_u, z_u, y_u);
            if (r.primal_rel <= opts.tol && r.dual_rel <= opts.tol) break;

            const Vector dy = y_hat - y_prev;
            const double dy_norm = dy.cwiseAbs().maxCoeff();
            if (dy_norm > 1e-14) {
                const Vector dyn = dy / dy_norm;
                const double ktdy = (s.K.transpose() * dyn).cwiseAbs().maxCoeff();
                const double sup = support_function(s, dyn);
                if (ktdy <= 1e-10 && sup < -1e-10) {
                    infeasible = true;
                    break;
                }
            }
            y_prev = y_hat;

            if (it % (check_interval * 8) == 0 && r.dual_rel > 0.0 && r.primal_rel > 0.0) {
                const double scale = std::sqrt(r.primal_rel / r.dual_rel);
                if (scale > 5.0 || scale < 0.2) {
                    rho_base = std::clamp(rho_base * std::clamp(scale, 0.1, 10.0), 1e-6, 1e6);
                    fill_rho();
                    refactor();
                }
            }
        }
    }
    sol.iterations = std::min(it, opts.max_iters);

    Vector x = unscale_x(x_hat);
    Vector y = unscale_y(y_hat);

    if (infeasible) {
        sol.x = x;
        sol.y = y;
        sol.status = QpStatus::primal_infeasible;
        sol.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
        return sol;
    }

    if (opts.polish) {
        const Vector kx_u = unscale_z(Vector(s.K * x_hat));
        polish_solution(qp, s, kx_u, x, y, opts.tol);
    }

    sol.x = x;
    sol.y = y;
    sol.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);

    // Final unscaled KKT residuals.
    const Matrix k_unscaled =
        s.e.cwiseInverse().asDiagonal() * s.K * s.d.cwiseInverse().asDiagonal();
    const Vector kx = k_unscaled * x;
    const Residuals r = compute_residuals(qp, s, x, kx, y);
    sol.stationarity_residual = r.dual_rel;

    Vector low(m), high(m);
    for (int i = 0; i < m; ++i) {
        low[i] = std::isfinite(s.low[i]) ? s.low[i] / s.e[i] : s.low[i];
        high[i] = std::isfinite(s.high[i]) ? s.high[i] / s.e[i] : s.high[i];
    }
    double pviol = 0.0;
    for (int i = 0; i < s.n_eq + s.n_in; ++i) {
        pviol = std::max({pviol, low[i] - kx[i], kx[i] - high[i]});
    }
    for (const auto& ball : s.balls) {
        const double scale = s.e[ball.offset];
        const Vector v = kx.segment(ball.offset, ball.size) - ball.center / scale;
        pviol = std::max(pviol, v.norm() - ball.radius / scale);
    }
    sol.primal_residual = std::max(pviol, 0.0);

    double dual_feas = 0.0;
    double comp = 0.0;
    for (int i = s.n_eq; i < s.n_eq + s.n_in; ++i) {
        if (y[i] > 0.0) {
            if (high[i] >= kInf) {
                dual_feas = std::max(dual_feas, y[i]);
            } else {
                comp = std::max(comp, y[i] * std::abs(high[i] - kx[i]));
            }
        } else if (y[i] < 0.0) {
            if (low[i] <= -kInf) {
                dual_feas = std::max(dual_feas, -y[i]);
            } else {
                comp = std::max(comp, -y[i] * std::abs(kx[i] - low[i]));
            }
        }
    }
    for (const auto& ball : s.balls) {
        const double scale = s.e[ball.offset];
        const Vector yb = y.segment(ball.offset, ball.size);
        const Vector vb = kx.segment(ball.offset, ball.size) - ball.center / scale;
        comp = std::max(comp, std::abs(yb.dot(vb) - yb.norm() * ball.radius / scale));
    }
    sol.dual_feasibility_residual = dual_feas;
    sol.complementarity_residual = comp;

    const double obj_scale = 1.0 + std::abs(sol.objective);
    const bool ok = r.primal_rel <= opts.tol && r.dual_rel <= opts.tol &&
                    sol.dual_feasibility_residual <= opts.tol * obj_scale &&
                    sol.complementarity_residual <= std::sqrt(opts.tol) * obj_scale;
    sol.status = ok ? QpStatus::solved : QpStatus::max_iterations;
    return sol;
}

}  // namespace obsplan
