#include "rowplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rowplan/errors.hpp"

namespace rowplan::oracle {

namespace {

struct Scored {
  std::vector<PlantId> ids;
  double c = 0.0;
  double k = 0.0;
  double travel = 0.0;
};

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

// Strict "a before b" under the selection order, written out longhand.
bool better(const Scored& a, const Scored& b, SelectionMode mode) {
  if (mode == SelectionMode::baseline) {
    if (a.ids.size() > b.ids.size()) return true;
    if (a.ids.size() < b.ids.size()) return false;
  } else {
    if (!near(a.k, b.k)) return a.k > b.k;
  }
  if (!near(a.c, b.c)) return a.c > b.c;
  if (!near(a.travel, b.travel)) return a.travel < b.travel;
  if (!a.ids.empty() && !b.ids.empty() && a.ids[0] != b.ids[0]) return a.ids[0] < b.ids[0];
  return a.ids < b.ids;
}

double nearest_crop_kappa(const Plant& w, std::span<const Plant> crops, const HarmfulnessContext& h) {
  double weight = (w.priority == Priority::high) ? h.high_weight : h.low_weight;
  double top = w.area_mm2 * w.beta * weight;
  double best = std::numeric_limits<double>::max();
  double area = 0.0;
  for (const Plant& c : crops) {
    if (c.kind != PlantKind::crop) continue;
    double dist = std::sqrt((w.x - c.x) * (w.x - c.x) + (w.y - c.y) * (w.y - c.y));
    if (dist < best) {
      best = dist;
      area = c.area_mm2;
    }
  }
  if (area == 0.0) {
    best = h.reference_distance;
    area = h.nominal_crop_area_mm2;
  }
  if (best == 0.0) return h.max_kappa;
  return std::min(h.max_kappa, top / (area * best));
}

}  // namespace

OracleResult brute_force_plan(std::span<const Plant> targets, std::span<const Plant> crops, Point start,
                              const ToolConfig& tool, const PlannerConfig& cfg, SelectionMode mode) {
  const std::size_t n = targets.size();
  if (n > kMaxTargets) {
    throw SizeError("oracle accepts at most " + std::to_string(kMaxTargets) + " targets, got " + std::to_string(n));
  }

  std::vector<double> kappa(n);
  for (std::size_t i = 0; i < n; ++i) kappa[i] = nearest_crop_kappa(targets[i], crops, cfg.harm);

  auto edge_score = [&](double x0, double y0, double x1, double y1) {
    double slack = (x1 - x0) / tool.gamma - std::fabs(y1 - y0) / tool.theta - tool.dwell;
    return 1.0 / (1.0 + std::exp(-cfg.omega * slack));
  };

  OracleResult result;
  Scored best;  // empty trajectory
  std::vector<std::size_t> order;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    order.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) order.push_back(i);
    }
    std::sort(order.begin(), order.end());
    do {
      ++result.sequences_examined;
      double px = start.x;
      double py = start.y;
      double sum = 0.0;
      double travel = 0.0;
      double k = 0.0;
      bool ok = true;
      for (std::size_t step = 0; step < order.size(); ++step) {
        const std::size_t idx = order[step];
        const Plant& t = targets[idx];
        // Target to target moves must advance strictly; the first move may
        // start level with the nozzle.
        bool downstream = step == 0 ? t.x >= px : t.x > px;
        if (!downstream) {
          ok = false;
          break;
        }
        double g = edge_score(px, py, t.x, t.y);
        if (g < cfg.rho) {
          ok = false;
          break;
        }
        sum += g;
        travel += std::fabs(t.y - py);
        k += kappa[idx];
        px = t.x;
        py = t.y;
      }
      if (!ok) continue;
      Scored s;
      for (std::size_t idx : order) s.ids.push_back(targets[idx].id);
      s.c = sum / static_cast<double>(order.size());
      s.k = k;
      s.travel = travel;
      if (better(s, best, mode)) best = std::move(s);
    } while (std::next_permutation(order.begin(), order.end()));
  }

  result.best_count = best.ids.size();
  result.best_c = best.c;
  result.best_k = best.k;
  result.best_travel = best.travel;
  result.best_nodes = best.ids;
  return result;
}

double monte_carlo_reach(double delta_y, double gamma, double theta, double eta, std::size_t samples,
                         std::uint64_t seed) {
  if (!(delta_y >= 0.0) || !(gamma >= 0.0) || !(theta > 0.0) || !(eta >= 0.0)) {
    throw DomainError("monte_carlo_reach requires delta_y >= 0, gamma >= 0, theta > 0, eta >= 0");
  }
  if (samples < 10000) throw DomainError("monte_carlo_reach needs at least 10^4 samples");
  if (delta_y == 0.0 || eta == 0.0) return 1.0;

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(eta);
  const double ratio = gamma / theta;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    if (gap(rng) / delta_y > ratio) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace rowplan::oracle
