#include "malgpro/flow.hpp"

#include <cmath>
#include <string>

#include "malgpro/errors.hpp"

namespace malgpro {

namespace {

// M_j = J_x a dt + sum_l J_x b_l dw_j^l at node j.
Matrix flow_increment(const Path& path, const ControlProblem& problem, const PiecewiseControl& control,
                      const Derivatives& deriv, std::size_t j) {
  const TimeGrid& grid = control.grid();
  const auto jc = static_cast<Eigen::Index>(j);
  const Vector x = path.states.col(jc);
  const Vector u = control.values().col(jc);
  const double t = grid.node(j);
  Matrix m = deriv.drift_x(x, u, t) * grid.dt();
  const auto jb = deriv.diffusion_x(x, u, t);
  for (std::size_t l = 0; l < problem.noise_dim; ++l) m += jb[l] * path.increments(static_cast<Eigen::Index>(l), jc);
  return m;
}

void check_path(const Path& path, const PiecewiseControl& control) {
  if (static_cast<std::size_t>(path.states.cols()) != control.grid().steps() + 1 ||
      static_cast<std::size_t>(path.increments.cols()) != control.grid().steps())
    throw InvalidArgument("flow: path and control grids differ");
}

}  // namespace

std::vector<Matrix> propagate_flow_from(std::size_t anchor, const Path& path, const ControlProblem& problem,
                                        const PiecewiseControl& control) {
  check_path(path, control);
  const std::size_t steps = control.grid().steps();
  if (anchor > steps) throw InvalidArgument("propagate_flow_from: anchor out of range");
  const Derivatives deriv(problem);
  const auto n = static_cast<Eigen::Index>(problem.state_dim);
  std::vector<Matrix> out;
  out.reserve(steps - anchor + 1);
  out.push_back(Matrix::Identity(n, n));
  for (std::size_t j = anchor; j < steps; ++j) {
    const Matrix m = flow_increment(path, problem, control, deriv, j);
    out.push_back(out.back() + m * out.back());
  }
  return out;
}

FactorizedFlow propagate_flow_factorized(const Path& path, const ControlProblem& problem,
                                         const PiecewiseControl& control) {
  check_path(path, control);
  const std::size_t steps = control.grid().steps();
  const Derivatives deriv(problem);
  const auto n = static_cast<Eigen::Index>(problem.state_dim);
  const Matrix eye = Matrix::Identity(n, n);
  FactorizedFlow flow;
  flow.y.reserve(steps + 1);
  flow.z.reserve(steps + 1);
  flow.y.push_back(eye);
  flow.z.push_back(eye);
  for (std::size_t j = 0; j < steps; ++j) {
    const Matrix m = flow_increment(path, problem, control, deriv, j);
    flow.y.push_back(flow.y.back() + m * flow.y.back());
    // Z_{j+1} = Z_j (I + M_j)^{-1}, so Z_j Y_j = I holds to round-off.
    const Matrix step = eye + m;
    flow.z.push_back(step.transpose().partialPivLu().solve(flow.z.back().transpose()).transpose());
    const double cond = flow.y.back().cwiseAbs().colwise().sum().maxCoeff() *
                        flow.z.back().cwiseAbs().colwise().sum().maxCoeff();
    if (!(cond <= kMaxFlowCondition)) throw IllConditionedFlowError(j + 1, cond);
  }
  return flow;
}

PathFlow PathFlow::factorized(FactorizedFlow flow) {
  if (flow.y.empty() || flow.y.size() != flow.z.size()) throw InvalidArgument("PathFlow: malformed factors");
  PathFlow out;
  out.mode_ = FlowMode::factorized;
  out.steps_ = flow.y.size() - 1;
  out.factors_ = std::move(flow);
  return out;
}

PathFlow PathFlow::dense(const Path& path, const ControlProblem& problem, const PiecewiseControl& control) {
  PathFlow out;
  out.mode_ = FlowMode::dense;
  out.steps_ = control.grid().steps();
  out.dense_.reserve(out.steps_ + 1);
  for (std::size_t r = 0; r <= out.steps_; ++r) out.dense_.push_back(propagate_flow_from(r, path, problem, control));
  return out;
}

Matrix PathFlow::gamma(std::size_t s, std::size_t t) const {
  if (s > t) throw InvalidArgument("flow: Gamma_{s,t} requires s <= t");
  if (t > steps_) throw InvalidArgument("flow: node index out of range");
  if (mode_ == FlowMode::dense) return dense_[s][t - s];
  if (s == t) {
    const Eigen::Index n = factors_.y.front().rows();
    return Matrix::Identity(n, n);
  }
  return factors_.y[t] * factors_.z[s];
}

const FactorizedFlow& PathFlow::factors() const {
  if (mode_ != FlowMode::factorized) throw InvalidArgument("flow: factors requested from a dense flow");
  return factors_;
}

FlowBundle compute_flows(const PathBundle& paths, const ControlProblem& problem, const PiecewiseControl& control,
                         FlowMode mode) {
  if (!(paths.grid == control.grid())) throw InvalidArgument("compute_flows: paths and control use different grids");
  FlowBundle bundle{paths.grid, {}};
  bundle.flows.reserve(paths.paths.size());
  for (const Path& p : paths.paths) {
    if (mode == FlowMode::factorized) {
      try {
        bundle.flows.push_back(PathFlow::factorized(propagate_flow_factorized(p, problem, control)));
        continue;
      } catch (const IllConditionedFlowError&) {
      }
    }
    bundle.flows.push_back(PathFlow::dense(p, problem, control));
  }
  return bundle;
}

const Matrix& MalliavinSlice::at(std::size_t j) const {
  if (j < anchor_) throw InvalidArgument("Malliavin derivative D_s x_t requires s <= t");
  if (j - anchor_ >= derivatives_.size()) throw InvalidArgument("Malliavin derivative: node out of range");
  return derivatives_[j - anchor_];
}

MalliavinSlice malliavin_derivative(const PathFlow& flow, const Path& path, const ControlProblem& problem,
                                    const PiecewiseControl& control, std::size_t anchor) {
  check_path(path, control);
  const std::size_t steps = control.grid().steps();
  if (anchor > steps) throw InvalidArgument("malliavin_derivative: anchor out of range");
  const auto r = static_cast<Eigen::Index>(anchor);
  const Matrix b = problem.diffusion(path.states.col(r), control.at(anchor), control.grid().node(anchor));
  std::vector<Matrix> out;
  out.reserve(steps - anchor + 1);
  out.push_back(b);
  for (std::size_t j = anchor + 1; j <= steps; ++j) out.push_back(flow.gamma(anchor, j) * b);
  return MalliavinSlice(anchor, std::move(out));
}

Vector scalar_log_flow(const Path& path, const ControlProblem& problem, const PiecewiseControl& control) {
  if (problem.state_dim != 1 || problem.noise_dim != 1)
    throw InvalidArgument("scalar flow requires state_dim = noise_dim = 1");
  check_path(path, control);
  const TimeGrid& grid = control.grid();
  const std::size_t steps = grid.steps();
  const Derivatives deriv(problem);
  const double q = problem.covariance()(0, 0);
  Vector log_eta(static_cast<Eigen::Index>(steps + 1));
  log_eta(0) = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    const auto jc = static_cast<Eigen::Index>(j);
    const Vector x = path.states.col(jc);
    const Vector u = control.values().col(jc);
    const double t = grid.node(j);
    const double ax = deriv.drift_x(x, u, t)(0, 0);
    const double bx = deriv.diffusion_x(x, u, t)[0](0, 0);
    log_eta(jc + 1) = log_eta(jc) + (ax - 0.5 * bx * bx * q) * grid.dt() + bx * path.increments(0, jc);
  }
  return log_eta;
}

double scalar_malliavin_closed_form(const Path& path, const ControlProblem& problem,
                                   const PiecewiseControl& control, std::size_t s, std::size_t t) {
  if (problem.state_dim != 1 || problem.noise_dim != 1)
    throw InvalidArgument("scalar closed form requires state_dim = noise_dim = 1");
  if (s > t) throw InvalidArgument("Malliavin derivative D_s x_t requires s <= t");
  if (t > control.grid().steps()) throw InvalidArgument("scalar closed form: node out of range");
  const auto sc = static_cast<Eigen::Index>(s);
  const double b = problem.diffusion(path.states.col(sc), control.at(s), control.grid().node(s))(0, 0);
  if (std::abs(b) < 1e-12) throw InvalidArgument("scalar closed form: |b(x_s,u_s)| below 1e-12");
  const Vector log_eta = scalar_log_flow(path, problem, control);
  return b * std::exp(log_eta(static_cast<Eigen::Index>(t)) - log_eta(sc));
}

}  // namespace malgpro
