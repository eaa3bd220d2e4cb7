#include "etforge/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "etforge/parallel.hpp"
#include "noise.hpp"

namespace etforge {

double ETCurve::at(double t) const {
  if (times.empty()) throw InputError("ET curve is empty");
  if (t < times.front() - 1e-12 || t > times.back() + 1e-9) {
    throw InputError("time " + std::to_string(t) + " s outside ET curve [" +
                     std::to_string(times.front()) + ", " + std::to_string(times.back()) + "]");
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return values.back();
  if (it == times.begin()) return values.front();
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

ETCurve envelope(std::span<const double> history, double dt, std::string edp) {
  if (history.empty()) throw InputError("envelope: history is empty");
  ETCurve c;
  c.edp = std::move(edp);
  c.times.resize(history.size());
  c.values.resize(history.size());
  double running = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (!std::isfinite(history[i])) throw NumericalError("envelope: non-finite history value", i);
    running = std::max(running, std::abs(history[i]));
    c.times[i] = dt * static_cast<double>(i);
    c.values[i] = running;
  }
  return c;
}

EDP parse_edp(std::string_view name) {
  if (name == "drift") return EDP::DriftRatio;
  if (name == "roof-displacement") return EDP::RoofDisplacement;
  if (name == "base-shear") return EDP::BaseShear;
  if (name == "ductility") return EDP::StoryDuctility;
  throw InputError("unknown EDP '" + std::string(name) +
                   "' (expected drift, roof-displacement, base-shear or ductility)");
}

std::string_view to_string(EDP edp) {
  switch (edp) {
    case EDP::DriftRatio: return "drift";
    case EDP::RoofDisplacement: return "roof-displacement";
    case EDP::BaseShear: return "base-shear";
    case EDP::StoryDuctility: return "ductility";
  }
  return "drift";
}

BilinearSpring Story::spring() const {
  BilinearSpring s;
  s.stiffness = stiffness * mass;
  if (hysteresis != Hysteresis::Linear) {
    s.yield_force = s.stiffness * yield_deformation();
    s.post_yield_ratio = hysteresis == Hysteresis::Bilinear ? post_yield_ratio : 0.0;
  }
  return s;
}

namespace {

struct Matrices {
  Eigen::VectorXd mass;
  Eigen::MatrixXd stiffness;
};

Matrices assemble(const ShearBuildingModel& model) {
  const auto n = static_cast<Eigen::Index>(model.stories.size());
  Matrices m{Eigen::VectorXd(n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = model.stories[static_cast<std::size_t>(i)];
    m.mass(i) = s.mass;
    const double k = s.stiffness * s.mass;
    m.stiffness(i, i) += k;
    if (i > 0) {
      m.stiffness(i - 1, i - 1) += k;
      m.stiffness(i, i - 1) -= k;
      m.stiffness(i - 1, i) -= k;
    }
  }
  return m;
}

}  // namespace

ShearBuildingModel ShearBuildingModel::uniform(std::size_t n, double first_period,
                                               Hysteresis hysteresis, double yield_drift,
                                               double post_yield_ratio, double damping,
                                               double height) {
  if (n == 0) throw InputError("shear building needs at least one story");
  ShearBuildingModel m;
  m.damping = damping;
  Story s;
  s.height = height;
  s.hysteresis = hysteresis;
  s.yield_drift = yield_drift;
  s.post_yield_ratio = post_yield_ratio;
  m.stories.assign(n, s);
  const double unit_period = m.periods().front();
  const double ratio = unit_period / first_period;
  for (auto& story : m.stories) story.stiffness *= ratio * ratio;
  m.validate();
  return m;
}

void ShearBuildingModel::validate() const {
  if (stories.empty()) throw InputError("shear building needs at least one story");
  if (!(damping >= 0.0 && damping < 1.0)) throw InputError("shear building damping must be in [0, 1)");
  for (std::size_t i = 0; i < stories.size(); ++i) {
    const auto& s = stories[i];
    const std::string where = "story " + std::to_string(i + 1) + ": ";
    if (!(s.mass > 0.0) || !(s.stiffness > 0.0) || !(s.height > 0.0)) {
      throw InputError(where + "mass, stiffness and height must be positive");
    }
    if (s.hysteresis != Hysteresis::Linear && !(s.yield_drift > 0.0)) {
      throw InputError(where + "yield drift must be positive for nonlinear stories");
    }
    if (s.hysteresis == Hysteresis::Bilinear && !(s.post_yield_ratio >= 0.0 && s.post_yield_ratio < 1.0)) {
      throw InputError(where + "post-yield ratio must be in [0, 1)");
    }
  }
}

std::vector<double> ShearBuildingModel::periods() const {
  const auto m = assemble(*this);
  const Eigen::MatrixXd mass = m.mass.asDiagonal();
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.stiffness, mass);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    out.push_back(2.0 * std::numbers::pi / std::sqrt(solver.eigenvalues()(i)));
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

const std::vector<double>& StructuralResponse::history(EDP edp) const {
  switch (edp) {
    case EDP::DriftRatio: return max_drift_ratio;
    case EDP::RoofDisplacement: return roof_displacement;
    case EDP::BaseShear: return base_shear;
    case EDP::StoryDuctility: return max_ductility;
  }
  return max_drift_ratio;
}

StructuralResponse integrate_shear_building(const ShearBuildingModel& model,
                                            const AccelerationRecord& record,
                                            const AnalysisOptions& options) {
  model.validate();
  const std::size_t ns = model.stories.size();
  const auto n = static_cast<Eigen::Index>(ns);
  const auto mats = assemble(model);
  const auto periods = model.periods();
  const double w1 = 2.0 * std::numbers::pi / periods.front();
  const double w2 = 3.0 * w1;
  const double a_mass = model.damping * 2.0 * w1 * w2 / (w1 + w2);
  const double a_stiff = model.damping * 2.0 / (w1 + w2);
  const Eigen::MatrixXd damping =
      a_mass * Eigen::MatrixXd(mats.mass.asDiagonal()) + a_stiff * mats.stiffness;

  std::vector<BilinearSpring> springs;
  double total_mass = 0.0;
  bool any_linear = false;
  for (const auto& s : model.stories) {
    springs.push_back(s.spring());
    total_mass += s.mass;
    any_linear = any_linear || s.hysteresis == Hysteresis::Linear;
  }

  const int sub = substeps_for(record.dt(), periods.back());
  const double h = record.dt() / sub;
  const double a0 = 4.0 / (h * h);
  const Eigen::MatrixXd base_eff = a0 * Eigen::MatrixXd(mats.mass.asDiagonal()) + (2.0 / h) * damping;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  const auto& ag = record.samples();
  Eigen::VectorXd a = -Eigen::VectorXd::Constant(n, ag[0]);
  std::vector<BilinearSpring::State> committed(ns);

  StructuralResponse out;
  out.dt = record.dt();
  auto push = [&](const std::vector<BilinearSpring::State>& states) {
    double drift = 0.0;
    double ductility = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
      const double d = std::abs(states[i].deformation);
      drift = std::max(drift, d / model.stories[i].height);
      if (!any_linear) ductility = std::max(ductility, d / model.stories[i].yield_deformation());
    }
    out.max_drift_ratio.push_back(drift);
    out.roof_displacement.push_back(u(n - 1));
    out.base_shear.push_back(springs[0].force(states[0]) / total_mass);
    out.max_ductility.push_back(any_linear ? std::numeric_limits<double>::quiet_NaN() : ductility);
    return drift;
  };
  push(committed);

  std::vector<BilinearSpring::State> trial(ns);
  Eigen::VectorXd internal(n);
  Eigen::MatrixXd tangent(n, n);
  for (std::size_t i = 1; i < ag.size(); ++i) {
    for (int j = 1; j <= sub; ++j) {
      const double g = ag[i - 1] + (static_cast<double>(j) / sub) * (ag[i] - ag[i - 1]);
      Eigen::VectorXd un = u;
      bool converged = false;
      for (int iter = 0; iter < 50; ++iter) {
        const Eigen::VectorXd delta = un - u;
        const Eigen::VectorXd acc = a0 * delta - (4.0 / h) * v - a;
        const Eigen::VectorXd vel = (2.0 / h) * delta - v;
        internal.setZero();
        tangent.setZero();
        for (std::size_t s = 0; s < ns; ++s) {
          const auto si = static_cast<Eigen::Index>(s);
          const double deformation = un(si) - (s > 0 ? un(si - 1) : 0.0);
          trial[s] = springs[s].trial(committed[s], deformation);
          const double f = springs[s].force(trial[s]);
          const double kt = springs[s].tangent(committed[s], trial[s]);
          internal(si) += f;
          tangent(si, si) += kt;
          if (s > 0) {
            internal(si - 1) -= f;
            tangent(si - 1, si - 1) += kt;
            tangent(si, si - 1) -= kt;
            tangent(si - 1, si) -= kt;
          }
        }
        const Eigen::VectorXd residual = mats.mass.cwiseProduct(acc) + damping * vel + internal +
                                         mats.mass * g;
        const Eigen::VectorXd correction = (base_eff + tangent).ldlt().solve(-residual);
        un += correction;
        if (!correction.allFinite()) break;
        if (correction.norm() <= 1e-12 * (un.norm() + 1e-12)) {
          converged = true;
          break;
        }
      }
      if (!converged || !un.allFinite()) {
        if (!un.allFinite()) throw NumericalError("shear building integration diverged", i);
        throw NumericalError("shear building Newton iteration did not converge", i);
      }
      const Eigen::VectorXd delta = un - u;
      const Eigen::VectorXd a_next = a0 * delta - (4.0 / h) * v - a;
      v = (2.0 / h) * delta - v;
      a = a_next;
      u = un;
      for (std::size_t s = 0; s < ns; ++s) {
        const auto si = static_cast<Eigen::Index>(s);
        committed[s] = springs[s].trial(committed[s], u(si) - (s > 0 ? u(si - 1) : 0.0));
      }
    }
    const double drift = push(committed);
    if (drift > options.collapse_drift) {
      out.collapse_time = record.time(i);
      break;
    }
  }
  return out;
}

StructuralResponse structural_response(const StructuralModel& model,
                                       const AccelerationRecord& record,
                                       const AnalysisOptions& options) {
  if (const auto* building = std::get_if<ShearBuildingModel>(&model)) {
    return integrate_shear_building(*building, record, options);
  }
  const auto& sdof = std::get<SDOFModel>(model);
  const auto r = integrate_sdof(sdof, record);
  const double uy = sdof.yield_displacement();
  StructuralResponse out;
  out.dt = record.dt();
  for (std::size_t i = 0; i < record.size(); ++i) {
    const double x = r.displacement[i];
    const double drift = std::abs(x) / options.sdof_height;
    out.max_drift_ratio.push_back(drift);
    out.roof_displacement.push_back(x);
    out.base_shear.push_back(r.restoring_force[i]);
    out.max_ductility.push_back(std::isfinite(uy) ? std::abs(x) / uy
                                                  : std::numeric_limits<double>::quiet_NaN());
    if (drift > options.collapse_drift) {
      out.collapse_time = record.time(i);
      break;
    }
  }
  return out;
}

ETCurve run_et_analysis(const StructuralModel& model, const AccelerationRecord& etef, EDP edp,
                        const AnalysisOptions& options) {
  const auto response = structural_response(model, etef, options);
  const auto& history = response.history(edp);
  if (!history.empty() && std::isnan(history.front())) {
    throw InputError("ductility EDP needs nonlinear stories with a yield deformation");
  }
  ETCurve curve = envelope(history, etef.dt(), std::string(to_string(edp)));
  curve.collapse_time = response.collapse_time;
  return curve;
}

double fractile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("fractile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  if (w == 0.0 || values[hi] == values[lo]) return values[lo];
  return values[lo] + w * (values[hi] - values[lo]);
}

void IDACurve::summarise() {
  p16.assign(lambdas.size(), 0.0);
  p50.assign(lambdas.size(), 0.0);
  p84.assign(lambdas.size(), 0.0);
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    std::vector<double> column;
    for (const auto& row : edp) column.push_back(row[l]);
    p16[l] = fractile(column, 0.16);
    p50[l] = fractile(column, 0.50);
    p84[l] = fractile(column, 0.84);
  }
}

IDACurve run_ida(const StructuralModel& model, std::span<const AccelerationRecord> records,
                 std::span<const double> lambdas, EDP edp, const AnalysisOptions& options,
                 int workers) {
  if (records.empty()) throw InputError("IDA: no records");
  if (lambdas.empty()) throw InputError("IDA: empty scale-factor grid");
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    if (!(lambdas[l] >= 0.0) || (l > 0 && !(lambdas[l] > lambdas[l - 1]))) {
      throw InputError("IDA: scale factors must be non-negative and increasing");
    }
  }
  IDACurve ida;
  ida.lambdas.assign(lambdas.begin(), lambdas.end());
  ida.edp.assign(records.size(), std::vector<double>(lambdas.size(), 0.0));
  ida.collapsed.assign(records.size(), std::vector<bool>(lambdas.size(), false));
  for (std::size_t r = 0; r < records.size(); ++r) {
    ida.record_ids.push_back(records[r].name().empty() ? "record-" + std::to_string(r + 1)
                                                       : records[r].name());
  }
  std::vector<char> collapsed(records.size() * lambdas.size(), 0);
  parallel_for(records.size() * lambdas.size(), workers, [&](std::size_t cell) {
    const std::size_t r = cell / lambdas.size();
    const std::size_t l = cell % lambdas.size();
    StructuralResponse resp;
    try {
      resp = structural_response(model, records[r].scaled(lambdas[l]), options);
    } catch (const NumericalError&) {
      collapsed[cell] = 1;
      ida.edp[r][l] = std::numeric_limits<double>::infinity();
      return;
    }
    const auto& history = resp.history(edp);
    double peak = 0.0;
    for (double x : history) peak = std::max(peak, std::abs(x));
    ida.edp[r][l] = peak;
    collapsed[cell] = resp.collapse_time.has_value() ? 1 : 0;
  });
  for (std::size_t cell = 0; cell < collapsed.size(); ++cell) {
    ida.collapsed[cell / lambdas.size()][cell % lambdas.size()] = collapsed[cell] != 0;
  }
  ida.summarise();
  return ida;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("correlation needs two equal series");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

ComparisonReport compare_et_vs_ida(const ETCurve& et, const IntensifyingProfile& profile,
                                   const IDACurve& ida) {
  if (et.times.empty()) throw InputError("compare: ET curve is empty");
  if (ida.p50.size() != ida.lambdas.size()) throw InputError("compare: IDA curve not summarised");
  const double t_end = et.times.back();
  const double lambda_end = profile.value(t_end);
  ComparisonReport rep;
  std::vector<double> p16;
  std::vector<double> p84;
  for (std::size_t l = 0; l < ida.lambdas.size(); ++l) {
    const double lambda = ida.lambdas[l];
    if (!(lambda > 0.0) || lambda > lambda_end * (1.0 + 1e-12)) continue;
    const double t = intensity_to_time(profile, std::min(lambda, lambda_end), t_end);
    rep.lambdas.push_back(lambda);
    rep.times.push_back(t);
    rep.et.push_back(et.at(t));
    rep.median.push_back(ida.p50[l]);
    p16.push_back(ida.p16[l]);
    p84.push_back(ida.p84[l]);
  }
  if (rep.lambdas.size() < 2) {
    throw InputError("compare: ET curve and IDA grid overlap in fewer than two scale factors");
  }
  rep.correlation = pearson_correlation(rep.et, rep.median);
  auto mean_rel = [&](const std::vector<double>& ref, bool absolute) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (!(ref[i] > 0.0) || !std::isfinite(ref[i])) continue;
      const double d = (rep.et[i] - ref[i]) / ref[i];
      sum += absolute ? std::abs(d) : d;
      ++count;
    }
    return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  };
  rep.mean_relative_error = mean_rel(rep.median, true);
  rep.mean_deviation_p16 = mean_rel(p16, false);
  rep.mean_deviation_p50 = mean_rel(rep.median, false);
  rep.mean_deviation_p84 = mean_rel(p84, false);
  return rep;
}

std::vector<PerformanceCheck> check_performance(const ETCurve& et,
                                                const IntensifyingProfile& profile,
                                                std::span<const PerformanceLimit> limits) {
  if (et.times.empty()) throw InputError("performance check: ET curve is empty");
  const double t_end = et.times.back();
  std::vector<PerformanceCheck> out;
  for (const auto& limit : limits) {
    PerformanceCheck c;
    c.limit = limit;
    if (et.collapsed()) {
      // A collapsed curve ends at the collapse time; later hazard levels are failures.
      const double top = profile.value(t_end);
      if (limit.lambda > top) {
        c.time = std::numeric_limits<double>::infinity();
        c.demand = std::numeric_limits<double>::infinity();
        c.passed = false;
        out.push_back(c);
        continue;
      }
    }
    c.time = intensity_to_time(profile, limit.lambda, t_end);
    c.demand = et.at(c.time);
    c.passed = c.demand <= limit.cap;
    out.push_back(c);
  }
  return out;
}

std::vector<AccelerationRecord> synthetic_records(const BaseTargetSpectrum& base,
                                                  std::span<const double> periods,
                                                  const SyntheticSuite& suite) {
  if (suite.count == 0) throw InputError("synthetic records: count must be positive");
  if (periods.empty()) throw InputError("synthetic records: period grid is empty");
  if (!(suite.dt > 0.0) || !(suite.duration > suite.dt)) {
    throw InputError("synthetic records: need 0 < dt < duration");
  }
  const double dt = suite.dt;
  const double duration = suite.duration;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  const double ramp_up = std::min(2.0, 0.2 * duration);
  const double ramp_down = std::min(4.0, 0.3 * duration);
  std::vector<double> grid(periods.begin(), periods.end());
  if (suite.anchor_period) grid = {*suite.anchor_period};
  std::vector<AccelerationRecord> out;
  for (std::size_t r = 0; r < suite.count; ++r) {
    auto samples = detail::band_limited_noise(n, dt, 1.0 / periods.back(), 1.0 / periods.front(),
                                              suite.rng_seed + 7919 * (r + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = dt * static_cast<double>(i);
      double w = 1.0;
      if (t < ramp_up) w = 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp_up));
      if (t > duration - ramp_down) {
        w = 0.5 * (1.0 - std::cos(std::numbers::pi * (duration - t) / ramp_down));
      }
      samples[i] *= w;
    }
    AccelerationRecord rec(dt, std::move(samples), "synthetic-" + std::to_string(r + 1));
    const std::vector<double> at{rec.duration()};
    const auto spectra = response_spectra(rec, grid, at, suite.damping);
    double ratio = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      ratio += spectra.acceleration.at(j, 0) / base.acceleration(grid[j]);
    }
    ratio /= static_cast<double>(grid.size());
    out.push_back(rec.scaled(1.0 / ratio));
  }
  return out;
}

}  // namespace etforge
