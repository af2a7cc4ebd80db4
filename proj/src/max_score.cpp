#include "affinity/max_score.hpp"

#include <cmath>

#include "affinity/errors.hpp"
#include "affinity/rng.hpp"
#include "affinity/stats.hpp"

namespace affinity {

long ScoreSpec::free_count() const {
  const long total = kind == ScoreKind::Diagonal ? O : O * O;
  return total - static_cast<long>(fixed.size());
}

void ScoreSpec::validate() const {
  if (O < 1) throw ValidationError("score spec needs at least one attribute");
  if (!(domain.first < domain.second))
    throw ValidationError("coefficient domain must be a nonempty interval");
  for (const auto& [cell, value] : fixed) {
    const auto [i, j] = cell;
    if (i < 0 || i >= O || j < 0 || j >= O)
      throw ValidationError("pinned coefficient index out of range");
    if (kind == ScoreKind::Diagonal && i != j)
      throw ValidationError("diagonal spec can only pin diagonal coefficients");
    if (!std::isfinite(value)) throw ValidationError("pinned coefficient must be finite");
  }
  if (free_count() < 0) throw ValidationError("more pinned coefficients than parameters");
}

std::vector<SwapInequality> generate_inequalities(const CoupleSample& stage_sample, long count,
                                                  std::uint64_t seed) {
  stage_sample.validate();
  if (count < 1) throw ValidationError("inequality count must be at least 1");

  const Index t = stage_sample.size();
  std::vector<std::pair<Index, Index>> valid;
  for (Index i = 0; i < t; ++i) {
    for (Index j = i + 1; j < t; ++j) {
      // Identical attribute vectors on a side are treated as the same
      // individual appearing in two trades; swaps need distinct partners.
      if (stage_sample.X.row(i) == stage_sample.X.row(j)) continue;
      if (stage_sample.Y.row(i) == stage_sample.Y.row(j)) continue;
      valid.emplace_back(i, j);
    }
  }
  if (valid.empty())
    throw InsufficientTrades("stage has no pair of trades with distinct men and distinct women", 0);
  if (count > static_cast<long>(valid.size()))
    throw InsufficientTrades("requested " + std::to_string(count) +
                                 " inequalities but only " + std::to_string(valid.size()) +
                                 " valid trade pairs exist",
                             static_cast<long>(valid.size()));

  Rng rng(seed);
  for (long k = 0; k < count; ++k) {
    const auto pick = static_cast<std::size_t>(k) +
                      rng.integer(valid.size() - static_cast<std::size_t>(k));
    std::swap(valid[static_cast<std::size_t>(k)], valid[pick]);
  }

  std::vector<SwapInequality> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const auto [i, j] = valid[static_cast<std::size_t>(k)];
    SwapInequality g;
    g.x_m1 = stage_sample.X.row(i);
    g.y_w1 = stage_sample.Y.row(i);
    g.x_m2 = stage_sample.X.row(j);
    g.y_w2 = stage_sample.Y.row(j);
    if (!stage_sample.stage.empty()) g.stage = stage_sample.stage[static_cast<std::size_t>(i)];
    out.push_back(std::move(g));
  }
  return out;
}

long score(const MatrixRef& theta, const std::vector<SwapInequality>& inequalities) {
  if (!theta.allFinite()) throw ValidationError("theta holds non-finite entries");
  long satisfied = 0;
  for (const auto& g : inequalities) {
    const Vector dx = g.x_m1 - g.x_m2;
    const Vector dy = g.y_w1 - g.y_w2;
    const double z = dx.dot(theta * dy);
    if (z >= 0.0) ++satisfied;
  }
  return satisfied;
}

namespace {

struct Coefficient {
  long i, j;
  bool pinned;
  double value;  // pinned value; unused otherwise
};

// Z_g(theta) is linear in the coefficients: Z_g = sum_c theta_c * F_gc.
// Free columns are kept as a feature matrix and pinned columns are folded
// into a per-inequality offset, so one score evaluation is a GEMV plus a
// sign count.
struct ScoreEvaluator {
  Matrix features;  // |G| x n_free
  Vector offset;    // |G|
  long evaluate(const Vector& theta_free) const {
    Vector z = offset;
    if (theta_free.size() > 0) z.noalias() += features * theta_free;
    return (z.array() >= 0.0).count();
  }
};

ScoreEvaluator build_evaluator(const std::vector<SwapInequality>& inequalities,
                               const std::vector<Coefficient>& coefficients, long n_free) {
  const auto g_count = static_cast<Index>(inequalities.size());
  ScoreEvaluator ev;
  ev.features.resize(g_count, n_free);
  ev.offset = Vector::Zero(g_count);
  for (Index g = 0; g < g_count; ++g) {
    const auto& q = inequalities[static_cast<std::size_t>(g)];
    const Vector dx = q.x_m1 - q.x_m2;
    const Vector dy = q.y_w1 - q.y_w2;
    Index free_col = 0;
    for (const auto& c : coefficients) {
      const double f = dx(c.i) * dy(c.j);
      if (c.pinned)
        ev.offset(g) += c.value * f;
      else
        ev.features(g, free_col++) = f;
    }
  }
  return ev;
}

}  // namespace

ScoreFit fit_max_score(const std::vector<SwapInequality>& inequalities, const ScoreSpec& spec,
                       long runs, long population, long iterations, std::uint64_t seed) {
  spec.validate();
  if (inequalities.empty()) throw ValidationError("no inequalities supplied");
  if (runs < 1) throw ValidationError("runs must be at least 1");
  if (iterations < 1) throw ValidationError("iterations must be at least 1");
  for (const auto& g : inequalities)
    if (g.x_m1.size() != spec.O || g.y_w1.size() != spec.O)
      throw DimensionMismatch("inequality attribute length does not match the score spec");

  std::vector<Coefficient> coefficients;
  for (long i = 0; i < spec.O; ++i) {
    for (long j = 0; j < spec.O; ++j) {
      if (spec.kind == ScoreKind::Diagonal && i != j) continue;
      const auto it = spec.fixed.find({i, j});
      coefficients.push_back({i, j, it != spec.fixed.end(), it != spec.fixed.end() ? it->second : 0.0});
    }
  }
  const long n_free = spec.free_count();
  const ScoreEvaluator ev = build_evaluator(inequalities, coefficients, n_free);

  ScoreFit fit;
  fit.runs = runs;
  fit.population = population;
  fit.seed = seed;

  auto assemble = [&](const Vector& theta_free) {
    Matrix theta = Matrix::Zero(spec.O, spec.O);
    Index free_col = 0;
    for (const auto& c : coefficients) theta(c.i, c.j) = c.pinned ? c.value : theta_free(free_col++);
    return theta;
  };

  if (n_free == 0) {
    const Vector empty(0);
    fit.best_score = ev.evaluate(empty);
    fit.best_theta = assemble(empty);
    for (const auto& c : coefficients)
      fit.coefficients.push_back({c.i, c.j, true, c.value, c.value, c.value});
    return fit;
  }

  if (population < 4) throw ValidationError("differential evolution needs a population of at least 4");
  const double de_weight = 0.8;
  const double crossover = 0.9;
  const auto [lo, hi] = spec.domain;

  Matrix maximizers(runs, n_free);
  long best_score = -1;
  Vector best_theta_free(n_free);

  for (long run = 0; run < runs; ++run) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(run)));
    std::vector<Vector> pop(static_cast<std::size_t>(population));
    std::vector<long> scores(static_cast<std::size_t>(population));
    long run_best = -1;
    Vector run_best_theta(n_free);
    for (long m = 0; m < population; ++m) {
      Vector x(n_free);
      for (long d = 0; d < n_free; ++d) x(d) = rng.uniform(lo, hi);
      pop[static_cast<std::size_t>(m)] = x;
      const long s = ev.evaluate(x);
      scores[static_cast<std::size_t>(m)] = s;
      if (s > run_best) {
        run_best = s;
        run_best_theta = x;
      }
    }
    Vector trial(n_free);
    for (long gen = 0; gen < iterations; ++gen) {
      for (long m = 0; m < population; ++m) {
        const auto pick_other = [&](std::initializer_list<long> taken) {
          long r;
          do {
            r = static_cast<long>(rng.integer(static_cast<std::uint64_t>(population)));
            bool clash = r == m;
            for (long t : taken) clash = clash || r == t;
            if (!clash) break;
          } while (true);
          return r;
        };
        const long r1 = pick_other({});
        const long r2 = pick_other({r1});
        const long r3 = pick_other({r1, r2});
        const Vector& base = pop[static_cast<std::size_t>(r1)];
        const Vector& d1 = pop[static_cast<std::size_t>(r2)];
        const Vector& d2 = pop[static_cast<std::size_t>(r3)];
        const long jrand = static_cast<long>(rng.integer(static_cast<std::uint64_t>(n_free)));
        const Vector& target = pop[static_cast<std::size_t>(m)];
        for (long d = 0; d < n_free; ++d) {
          if (d == jrand || rng.uniform() < crossover) {
            double z = base(d) + de_weight * (d1(d) - d2(d));
            trial(d) = std::min(hi, std::max(lo, z));
          } else {
            trial(d) = target(d);
          }
        }
        const long s = ev.evaluate(trial);
        // >= lets the population drift across the flat plateaus of the
        // integer-valued score surface.
        if (s >= scores[static_cast<std::size_t>(m)]) {
          pop[static_cast<std::size_t>(m)] = trial;
          scores[static_cast<std::size_t>(m)] = s;
          if (s > run_best) {
            run_best = s;
            run_best_theta = trial;
          }
        }
      }
    }
    maximizers.row(run) = run_best_theta;
    if (run_best > best_score) {
      best_score = run_best;
      best_theta_free = run_best_theta;
    }
  }

  fit.best_score = best_score;
  fit.best_theta = assemble(best_theta_free);
  Index free_col = 0;
  for (const auto& c : coefficients) {
    CoefficientSummary s;
    s.i = c.i;
    s.j = c.j;
    s.pinned = c.pinned;
    if (c.pinned) {
      s.mean = s.lower = s.upper = c.value;
    } else {
      std::vector<double> values(static_cast<std::size_t>(runs));
      for (long r = 0; r < runs; ++r) values[static_cast<std::size_t>(r)] = maximizers(r, free_col);
      s.mean = mean_of(values);
      s.lower = quantile(values, 0.025);
      s.upper = quantile(values, 0.975);
      ++free_col;
    }
    fit.coefficients.push_back(s);
  }
  return fit;
}

}  // namespace affinity
