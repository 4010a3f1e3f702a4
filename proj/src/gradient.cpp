#include "malgpro/gradient.hpp"

#include <cmath>
#include <limits>

#include "malgpro/errors.hpp"
#include "malgpro/parallel.hpp"
#include "malgpro/random.hpp"

namespace malgpro {

namespace {

// Per-node quantities shared by both vector assemblies.
struct NodeData {
  std::vector<Matrix> flow_step;      // M_j
  std::vector<Matrix> drift_u;        // J_u a
  std::vector<Matrix> diffusion;      // B
  std::vector<std::vector<Matrix>> diffusion_x;
  std::vector<std::vector<Matrix>> diffusion_u;
  std::vector<Vector> cost_x;
  std::vector<Vector> cost_u;
  std::vector<Matrix> cost_xx;        // filled only when the Hessian term is active
  Vector terminal_x;
  Matrix terminal_xx;
  bool hessian_term = false;
};

NodeData collect(const Path& path, const ControlProblem& problem, const PiecewiseControl& control) {
  const TimeGrid& grid = control.grid();
  const std::size_t steps = grid.steps();
  const Derivatives deriv(problem);
  NodeData nd;
  for (std::size_t j = 0; j < steps; ++j) {
    const auto jc = static_cast<Eigen::Index>(j);
    const Vector x = path.states.col(jc);
    const Vector u = control.values().col(jc);
    const double t = grid.node(j);
    auto jbx = deriv.diffusion_x(x, u, t);
    Matrix m = deriv.drift_x(x, u, t) * grid.dt();
    for (std::size_t l = 0; l < problem.noise_dim; ++l)
      m += jbx[l] * path.increments(static_cast<Eigen::Index>(l), jc);
    nd.flow_step.push_back(std::move(m));
    nd.drift_u.push_back(deriv.drift_u(x, u, t));
    nd.diffusion.push_back(problem.diffusion(x, u, t));
    nd.diffusion_x.push_back(std::move(jbx));
    nd.diffusion_u.push_back(deriv.diffusion_u(x, u, t));
    for (const auto& jub : nd.diffusion_u.back())
      if (jub.cwiseAbs().maxCoeff() > 0.0) nd.hessian_term = true;
    nd.cost_x.push_back(deriv.cost_x(x, u, t));
    nd.cost_u.push_back(deriv.cost_u(x, u, t));
  }
  const Vector xt = path.states.col(static_cast<Eigen::Index>(steps));
  nd.terminal_x = deriv.terminal_x(xt);
  if (nd.hessian_term) {
    for (std::size_t j = 0; j < steps; ++j) {
      const auto jc = static_cast<Eigen::Index>(j);
      nd.cost_xx.push_back(deriv.cost_xx(path.states.col(jc), control.values().col(jc), grid.node(j)));
    }
    nd.terminal_xx = deriv.terminal_xx(xt);
  }
  return nd;
}

// J_u a - sum_{l,l'} q_{ll'} J_x b_l J_u b_l' at node j.
Matrix effective_drift_u(const NodeData& nd, const Matrix& q, std::size_t j) {
  Matrix out = nd.drift_u[j];
  const std::size_t d = nd.diffusion_x[j].size();
  for (std::size_t l = 0; l < d; ++l)
    for (std::size_t lp = 0; lp < d; ++lp) {
      const double qll = q(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp));
      if (qll != 0.0) out -= qll * nd.diffusion_x[j][l] * nd.diffusion_u[j][lp];
    }
  return out;
}

Matrix vector_sample_factorized(const NodeData& nd, const FactorizedFlow& flow, const ControlProblem& problem,
                                double dt) {
  const std::size_t steps = nd.flow_step.size();
  const auto k = static_cast<Eigen::Index>(problem.control_dim);
  const Matrix q = problem.covariance();
  Matrix g(k, static_cast<Eigen::Index>(steps));

  // c_j = sum_{i=j+1}^{N-1} grad L(i)^T Y_i dt + grad h^T Y_N;  S_j likewise with Y^T H Y.
  Eigen::RowVectorXd c = nd.terminal_x.transpose() * flow.y[steps];
  Matrix s;
  if (nd.hessian_term) s = flow.y[steps].transpose() * nd.terminal_xx * flow.y[steps];
  for (std::size_t jj = steps; jj-- > 0;) {
    if (jj + 1 < steps) {
      c += dt * (nd.cost_x[jj + 1].transpose() * flow.y[jj + 1]);
      if (nd.hessian_term) s += dt * (flow.y[jj + 1].transpose() * nd.cost_xx[jj + 1] * flow.y[jj + 1]);
    }
    const Matrix& z = flow.z[jj];
    Vector gj = ((c * z) * effective_drift_u(nd, q, jj)).transpose();
    if (nd.hessian_term) {
      const Matrix sz = s * z;
      for (std::size_t l = 0; l < problem.noise_dim; ++l) {
        const Vector zb = z * nd.diffusion[jj].col(static_cast<Eigen::Index>(l));
        gj += (zb.transpose() * sz * nd.diffusion_u[jj][l]).transpose();
      }
    }
    g.col(static_cast<Eigen::Index>(jj)) = gj + nd.cost_u[jj];
  }
  return g;
}

Matrix vector_sample_dense(const NodeData& nd, const ControlProblem& problem, double dt) {
  const std::size_t steps = nd.flow_step.size();
  const auto n = static_cast<Eigen::Index>(problem.state_dim);
  const auto k = static_cast<Eigen::Index>(problem.control_dim);
  const Matrix q = problem.covariance();
  Matrix g(k, static_cast<Eigen::Index>(steps));
  for (std::size_t r = 0; r < steps; ++r) {
    Matrix gamma = Matrix::Identity(n, n);
    Eigen::RowVectorXd first = Eigen::RowVectorXd::Zero(n);
    std::vector<Eigen::RowVectorXd> hess(problem.noise_dim, Eigen::RowVectorXd::Zero(n));
    for (std::size_t i = r; i < steps; ++i) {
      gamma += nd.flow_step[i] * gamma;  // now Gamma_{r, i+1}
      const std::size_t t = i + 1;
      const bool terminal = t == steps;
      const double w = terminal ? 1.0 : dt;
      const Vector& gradient = terminal ? nd.terminal_x : nd.cost_x[t];
      first += w * gradient.transpose() * gamma;
      if (nd.hessian_term) {
        const Matrix& h = terminal ? nd.terminal_xx : nd.cost_xx[t];
        const Matrix hg = h * gamma;
        for (std::size_t l = 0; l < problem.noise_dim; ++l) {
          const Vector db = gamma * nd.diffusion[r].col(static_cast<Eigen::Index>(l));
          hess[l] += w * db.transpose() * hg;
        }
      }
    }
    Vector gr = (first * effective_drift_u(nd, q, r)).transpose();
    if (nd.hessian_term)
      for (std::size_t l = 0; l < problem.noise_dim; ++l) gr += (hess[l] * nd.diffusion_u[r][l]).transpose();
    g.col(static_cast<Eigen::Index>(r)) = gr + nd.cost_u[r];
  }
  return g;
}

}  // namespace

double GradientEstimate::sup_norm() const {
  if (mean.size() == 0) return 0.0;
  return mean.colwise().norm().maxCoeff();
}

GradientEstimate estimate_gradient(const ControlProblem& problem, const PiecewiseControl& control,
                                   std::size_t batch, std::uint64_t seed, const GradientSampler& sampler) {
  if (batch == 0) throw InvalidArgument("gradient: batch must be positive");
  if (control.dim() != problem.control_dim) throw InvalidArgument("gradient: control dimension mismatch");
  const Matrix factor = covariance_factor(problem.covariance());
  const auto k = static_cast<Eigen::Index>(problem.control_dim);
  const auto steps = static_cast<Eigen::Index>(control.grid().steps());

  struct Partial {
    ArrayAccumulator grad;
    Accumulator cost;
    std::size_t diverged = 0;
  };
  const std::size_t chunks = (batch + kChunkSize - 1) / kChunkSize;
  std::vector<Partial> partial(chunks);
  for_each_chunk(batch, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Partial& part = partial[c];
    part.grad = ArrayAccumulator(k, steps);
    for (std::size_t p = begin; p < end; ++p) {
      Path path;
      try {
        path = simulate_path(problem, control, sample_path_increments(control.grid(), factor, seed, p), p);
      } catch (const DivergedPathError&) {
        ++part.diverged;
        continue;
      }
      const Matrix sample = sampler(path);
      if (!sample.allFinite()) {
        ++part.diverged;
        continue;
      }
      part.grad.add(sample.array());
      part.cost.add(path_cost(problem, path, control));
    }
  });

  ArrayAccumulator grad(k, steps);
  Accumulator cost;
  GradientEstimate out;
  for (const auto& part : partial) {
    grad.merge(part.grad);
    cost.merge(part.cost);
    out.paths_diverged += part.diverged;
  }
  out.paths_used = grad.count();
  out.cost = cost.estimate();
  if (out.paths_used == 0) {
    out.mean = Matrix::Constant(k, steps, std::numeric_limits<double>::quiet_NaN());
    out.std_error = out.mean;
  } else {
    out.mean = grad.mean().matrix();
    out.std_error = grad.std_error().matrix();
  }
  return out;
}

Matrix scalar_gradient_sample(const Path& path, const ControlProblem& problem, const PiecewiseControl& control) {
  if (problem.state_dim != 1 || problem.control_dim != 1 || problem.noise_dim != 1)
    throw InvalidArgument("scalar gradient requires n = k = d = 1");
  const TimeGrid& grid = control.grid();
  const std::size_t steps = grid.steps();
  const double dt = grid.dt();
  const double q = problem.covariance()(0, 0);
  const Derivatives deriv(problem);
  const Vector log_eta = scalar_log_flow(path, problem, control);

  Vector first_coef(static_cast<Eigen::Index>(steps)), second_coef(static_cast<Eigen::Index>(steps));
  Vector lx(static_cast<Eigen::Index>(steps)), lu(static_cast<Eigen::Index>(steps));
  bool second = false;
  for (std::size_t j = 0; j < steps; ++j) {
    const auto jc = static_cast<Eigen::Index>(j);
    const Vector x = path.states.col(jc);
    const Vector u = control.values().col(jc);
    const double t = grid.node(j);
    const double bu = deriv.diffusion_u(x, u, t)[0](0, 0);
    const double bx = deriv.diffusion_x(x, u, t)[0](0, 0);
    first_coef(jc) = deriv.drift_u(x, u, t)(0, 0) - q * bx * bu;
    second_coef(jc) = bu * problem.diffusion(x, u, t)(0, 0);
    if (bu != 0.0) second = true;
    lx(jc) = deriv.cost_x(x, u, t)(0);
    lu(jc) = deriv.cost_u(x, u, t)(0);
  }
  const Vector xt = path.states.col(static_cast<Eigen::Index>(steps));
  Vector lxx;
  double hxx = 0.0;
  if (second) {
    lxx.resize(static_cast<Eigen::Index>(steps));
    for (std::size_t j = 0; j < steps; ++j) {
      const auto jc = static_cast<Eigen::Index>(j);
      lxx(jc) = deriv.cost_xx(path.states.col(jc), control.values().col(jc), grid.node(j))(0, 0);
    }
    hxx = deriv.terminal_xx(xt)(0, 0);
  }

  // first(j)  = sum_{i>j} L_x(i) eta_i/eta_j dt + h_x eta_N/eta_j
  // second(j) = sum_{i>j} L_xx(i) (eta_i/eta_j)^2 dt + h_xx (eta_N/eta_j)^2
  // accumulated backwards through rho_j = eta_{j+1}/eta_j so no ratio is formed explicitly.
  Matrix g(1, static_cast<Eigen::Index>(steps));
  double first = deriv.terminal_x(xt)(0);
  double sec = hxx;
  for (std::size_t jj = steps; jj-- > 0;) {
    const auto jc = static_cast<Eigen::Index>(jj);
    if (jj + 1 < steps) {
      first += lx(jc + 1) * dt;
      if (second) sec += lxx(jc + 1) * dt;
    }
    const double rho = std::exp(log_eta(jc + 1) - log_eta(jc));
    first *= rho;
    sec *= rho * rho;
    g(0, jc) = first_coef(jc) * first + (second ? second_coef(jc) * sec : 0.0) + lu(jc);
  }
  return g;
}

Matrix vector_gradient_sample(const Path& path, const ControlProblem& problem, const PiecewiseControl& control,
                              FlowMode mode) {
  const NodeData nd = collect(path, problem, control);
  const double dt = control.grid().dt();
  if (mode == FlowMode::factorized) {
    try {
      return vector_sample_factorized(nd, propagate_flow_factorized(path, problem, control), problem, dt);
    } catch (const IllConditionedFlowError&) {
      // dense route below
    }
  }
  return vector_sample_dense(nd, problem, dt);
}

GradientEstimate gateaux_gradient_scalar(const ControlProblem& problem, const PiecewiseControl& control,
                                         std::size_t batch, std::uint64_t seed) {
  if (problem.state_dim != 1 || problem.control_dim != 1 || problem.noise_dim != 1)
    throw InvalidArgument("scalar gradient requires n = k = d = 1");
  return estimate_gradient(problem, control, batch, seed,
                           [&](const Path& p) { return scalar_gradient_sample(p, problem, control); });
}

GradientEstimate gateaux_gradient_vector(const ControlProblem& problem, const PiecewiseControl& control,
                                         std::size_t batch, std::uint64_t seed, FlowMode mode) {
  return estimate_gradient(problem, control, batch, seed,
                           [&](const Path& p) { return vector_gradient_sample(p, problem, control, mode); });
}

GradientEstimate gateaux_gradient(const ControlProblem& problem, const PiecewiseControl& control, std::size_t batch,
                                  std::uint64_t seed, FlowMode mode) {
  if (problem.state_dim == 1 && problem.control_dim == 1 && problem.noise_dim == 1)
    return gateaux_gradient_scalar(problem, control, batch, seed);
  return gateaux_gradient_vector(problem, control, batch, seed, mode);
}

}  // namespace malgpro
