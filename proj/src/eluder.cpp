#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pcmlp/errors.hpp"
#include "pcmlp/odpc.hpp"

namespace pcmlp {

void EluderInstance::validate() const {
  context.validate();
  if (!(epsilon > 0)) throw PreconditionError("eluder: epsilon must be positive");
  const auto rows = static_cast<std::size_t>(context.n_states * context.n_actions);
  for (const auto& m : models) {
    if (m.size() != rows) throw DimensionError("eluder: model has the wrong number of rows");
    for (const auto& r : m) {
      if (r.size() != context.n_states) throw DimensionError("eluder: transition row length");
    }
  }
  for (const auto& p : policies) {
    if (p.horizon() != context.horizon || p.n_states() != context.n_states || p.n_actions() != context.n_actions) {
      throw DimensionError("eluder: policy shape does not match the context");
    }
  }
}

EluderTable eluder_table(const EluderInstance& instance) {
  instance.validate();
  EluderTable table;
  const std::size_t n = instance.models.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) table.pairs.emplace_back(i, j);
  }
  const int nA = instance.context.n_actions;
  for (const auto& policy : instance.policies) {
    const Matrix occ = exact_average_occupancy(policy, instance.context);
    std::vector<double> row;
    for (const auto& [i, j] : table.pairs) {
      double e = 0.0;
      for (Eigen::Index s = 0; s < occ.rows(); ++s) {
        for (Eigen::Index a = 0; a < occ.cols(); ++a) {
          const auto k = static_cast<std::size_t>(s * nA + a);
          e += occ(s, a) * 0.5 * (instance.models[i][k] - instance.models[j][k]).lpNorm<1>();
        }
      }
      row.push_back(e);
    }
    table.expected_tv.push_back(std::move(row));
  }
  return table;
}

double eluder_w_k(const EluderInstance& instance, const EluderTable& table, std::span<const std::size_t> prefix,
                  std::size_t next) {
  if (next >= instance.policies.size()) throw DimensionError("eluder_w_k: policy index out of range");
  double best = 0.0;
  for (std::size_t p = 0; p < table.pairs.size(); ++p) {
    double sq = 0.0;
    for (const std::size_t i : prefix) {
      if (i >= instance.policies.size()) throw DimensionError("eluder_w_k: prefix index out of range");
      sq += table.expected_tv[i][p] * table.expected_tv[i][p];
    }
    if (std::sqrt(sq) <= instance.epsilon) best = std::max(best, 2.0 * table.expected_tv[next][p]);
  }
  return best;
}

double eluder_w_k(const EluderInstance& instance, std::span<const std::size_t> prefix, std::size_t next) {
  return eluder_w_k(instance, eluder_table(instance), prefix, next);
}

namespace {

struct Search {
  const EluderInstance& instance;
  const EluderTable& table;
  int max_length;
  bool allow_repeat;
  std::size_t budget;
  EluderResult result;
  std::vector<std::size_t> path;
  std::vector<double> sums;   // per pair: sum over the path of (E TV)^2
  std::vector<char> used;

  void dfs() {
    if (static_cast<int>(path.size()) > result.dimension) {
      result.dimension = static_cast<int>(path.size());
      result.witness = path;
    }
    if (static_cast<int>(path.size()) >= max_length) {
      result.capped = true;
      return;
    }
    for (std::size_t pi = 0; pi < instance.policies.size(); ++pi) {
      if (!allow_repeat && used[pi]) continue;
      if (result.nodes >= budget) {
        result.budget_exceeded = true;
        return;
      }
      ++result.nodes;
      double w = 0.0;
      for (std::size_t p = 0; p < table.pairs.size(); ++p) {
        if (std::sqrt(sums[p]) <= instance.epsilon) w = std::max(w, 2.0 * table.expected_tv[pi][p]);
      }
      if (w < instance.epsilon) continue;
      for (std::size_t p = 0; p < sums.size(); ++p) sums[p] += table.expected_tv[pi][p] * table.expected_tv[pi][p];
      path.push_back(pi);
      used[pi] = 1;
      dfs();
      used[pi] = 0;
      path.pop_back();
      for (std::size_t p = 0; p < sums.size(); ++p) sums[p] -= table.expected_tv[pi][p] * table.expected_tv[pi][p];
      if (result.capped || result.budget_exceeded) return;
    }
  }
};

}  // namespace

EluderResult eluder_dimension(const EluderInstance& instance, int max_length, bool allow_repeat,
                              std::size_t node_budget) {
  if (max_length < 0) throw PreconditionError("eluder_dimension: max_length must be >= 0");
  const EluderTable table = eluder_table(instance);
  Search search{instance, table, max_length, allow_repeat, node_budget, {}, {}, {}, {}};
  search.sums.assign(table.pairs.size(), 0.0);
  search.used.assign(instance.policies.size(), 0);
  search.dfs();
  return search.result;
}

EluderInstance parse_eluder_instance(const std::string& text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    EluderInstance inst;
    inst.epsilon = j.at("epsilon").get<double>();
    TabularMdp& c = inst.context;
    c.n_states = j.at("n_states").get<int>();
    c.n_actions = j.at("n_actions").get<int>();
    c.horizon = j.at("horizon").get<int>();
    c.initial_state = j.value("initial_state", 0);
    c.reward = j.contains("reward") ? j.at("reward").get<std::vector<double>>()
                                    : std::vector<double>(static_cast<std::size_t>(c.n_states * c.n_actions), 0.0);
    auto rows = [&](const json& m) {
      std::vector<Vector> out;
      for (const auto& r : m) {
        const auto v = r.get<std::vector<double>>();
        out.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
      return out;
    };
    for (const auto& m : j.at("models")) inst.models.push_back(rows(m));
    c.transition = j.contains("context") ? rows(j.at("context")) : inst.models.at(0);
    for (const auto& p : j.at("policies")) {
      inst.policies.push_back(TabularPolicy::deterministic(c.n_actions, p.get<std::vector<std::vector<int>>>()));
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("eluder instance: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("eluder instance: ") + e.what());
  }
}

EluderInstance load_eluder_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open eluder instance " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_eluder_instance(ss.str());
}

}  // namespace pcmlp
