#include "cotrack/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cotrack {

using nlohmann::json;

namespace {

Eigen::VectorXd to_vector(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd to_matrix(const json& j, int rows, int cols) {
  if (static_cast<int>(j.size()) != rows * cols)
    throw ParseError("expected " + std::to_string(rows * cols) + " entries");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r * cols + c].get<double>();
  return m;
}

json from_vector(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

json from_matrix(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) j.push_back(m(r, c));
  return j;
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name != "paper_sec5")
    throw ParseError("unknown built-in scenario: " + name);

  ScenarioConfig cfg;
  cfg.name = "paper_sec5";

  // four followers, unit weights, leader pinned to node 1
  cfg.graph.adjacency.setZero(4, 4);
  cfg.graph.adjacency(0, 3) = 1;  // 4 -> 1
  cfg.graph.adjacency(1, 0) = 1;  // 1 -> 2
  cfg.graph.adjacency(1, 2) = 1;  // 3 -> 2
  cfg.graph.adjacency(2, 1) = 1;  // 2 -> 3
  cfg.graph.adjacency(3, 1) = 1;  // 2 -> 4
  cfg.graph.adjacency(3, 2) = 1;  // 3 -> 4
  cfg.graph.pinning.resize(4);
  cfg.graph.pinning << 1, 0, 0, 0;

  cfg.leader.omega.resize(3);
  cfg.leader.omega << 10, 20, 30;
  cfg.leader.e_out.resize(2, 6);
  cfg.leader.e_out << 1, 0, 2, 0, 3, 0,
                      0, 3, 0, 2, 0, 1;
  cfg.leader.v0.resize(6);
  cfg.leader.v0 << 2, 0.6, 2, 0.8, 2, 1;

  cfg.observer_gains.mu1 = 80;
  cfg.observer_gains.mu2 = 60;
  cfg.observer_gains.d.resize(4);
  cfg.observer_gains.d << 1, 2, 3, 4;

  cfg.controller_gains.assign(4, {0.5 * Eigen::Matrix2d::Identity(), 0.5});

  const double thetas[4][5] = {{0.64, 1.10, 0.08, 0.64, 0.32},
                               {0.76, 1.17, 0.14, 0.93, 0.44},
                               {0.91, 1.26, 0.22, 1.27, 0.58},
                               {1.10, 1.36, 0.32, 1.67, 0.73}};
  for (const auto& th : thetas) {
    TwoLinkParams p;
    p.theta.resize(5);
    for (int k = 0; k < 5; ++k) p.theta(k) = th[k];
    cfg.plants.push_back(p);
  }

  cfg.mode = SimMode::closed_loop;
  cfg.horizon = 20.0;
  cfg.step = 1e-4;
  cfg.record_stride = 100;
  cfg.seed = 1;
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ParseError("malformed config: " + std::string(ex.what()));
  }

  if (doc.contains("scenario") && doc.size() == 1)
    return builtin_scenario(doc["scenario"].get<std::string>());

  ScenarioConfig cfg;
  std::vector<std::string> errors;
  const auto fail = [&](const std::string& field, const std::string& what) {
    errors.push_back(field + ": " + what);
  };
  const auto field = [&](const json& parent, const char* key,
                         bool required) -> const json* {
    if (parent.contains(key)) return &parent[key];
    if (required) fail(key, "missing");
    return nullptr;
  };

  cfg.name = doc.value("name", std::string("custom"));

  int n_nodes = 0;
  if (const json* g = field(doc, "graph", true)) {
    try {
      const json* pin = field(*g, "pinning", true);
      const json* adj = field(*g, "adjacency", true);
      if (pin && adj) {
        n_nodes = static_cast<int>(pin->size());
        cfg.graph.pinning = to_vector(*pin);
        cfg.graph.adjacency = to_matrix(*adj, n_nodes, n_nodes);
      }
    } catch (const std::exception& ex) {
      fail("graph", ex.what());
    }
  }

  if (const json* l = field(doc, "leader", true)) {
    try {
      const json* omega = field(*l, "omega", true);
      const json* e = field(*l, "e", true);
      const json* v0 = field(*l, "v0", true);
      if (omega && e && v0) {
        cfg.leader.omega = to_vector(*omega);
        cfg.leader.v0 = to_vector(*v0);
        const int m = cfg.leader.m();
        if (m > 0 && e->size() % m == 0)
          cfg.leader.e_out = to_matrix(*e, static_cast<int>(e->size()) / m, m);
        else
          fail("leader.e", "length must be a multiple of 2*len(omega)");
      }
    } catch (const std::exception& ex) {
      fail("leader", ex.what());
    }
  }

  if (const json* o = field(doc, "observer", true)) {
    cfg.observer_gains.mu1 = o->value("mu1", 0.0);
    cfg.observer_gains.mu2 = o->value("mu2", 0.0);
    if (o->contains("d"))
      cfg.observer_gains.d = to_vector((*o)["d"]);
    else
      cfg.observer_gains.d = Eigen::VectorXd::Ones(n_nodes);
  }

  const std::string mode_name = doc.value("mode", std::string("observer_only"));
  if (auto mode = parse_mode(mode_name))
    cfg.mode = *mode;
  else
    fail("mode", "unknown mode '" + mode_name + "'");

  if (cfg.mode == SimMode::closed_loop) {
    if (const json* c = field(doc, "controller", true)) {
      const double alpha = c->value("alpha", 0.0);
      try {
        const json* ks = field(*c, "k", true);
        if (ks) {
          for (const auto& kj : *ks) {
            ControllerGains g;
            g.k = to_matrix(kj, 2, 2);
            g.alpha = alpha;
            cfg.controller_gains.push_back(g);
          }
        }
      } catch (const std::exception& ex) {
        fail("controller.k", ex.what());
      }
    }
    if (const json* ps = field(doc, "plants", true)) {
      try {
        for (const auto& pj : *ps) {
          const Eigen::VectorXd th =
              to_vector(pj.contains("theta") ? pj["theta"] : pj);
          if (th.size() != 5) {
            fail("plants.theta", "expected 5 parameters");
            continue;
          }
          TwoLinkParams p;
          p.theta = th;
          if (pj.is_object()) p.gravity = pj.value("g", 9.8);
          cfg.plants.push_back(p);
        }
      } catch (const std::exception& ex) {
        fail("plants", ex.what());
      }
    }
  }

  if (const json* s = field(doc, "sim", false)) {
    cfg.horizon = s->value("horizon", cfg.horizon);
    cfg.step = s->value("step", cfg.step);
    cfg.record_stride = s->value("record_stride", cfg.record_stride);
    cfg.seed = s->value("seed", cfg.seed);
  }

  if (const json* init = field(doc, "initial", false)) {
    try {
      if (init->contains("observer")) {
        for (const auto& oj : (*init)["observer"]) {
          NodeObserverState s;
          s.eta_hat = to_vector(oj.at("eta_hat"));
          s.omega_hat = to_vector(oj.at("omega_hat"));
          s.e_hat = to_matrix(oj.at("e_hat"), cfg.leader.n_out(), cfg.leader.m());
          cfg.initial.observer.push_back(s);
        }
      }
      const auto read_pairs = [&](const char* key,
                                  std::vector<Eigen::Vector2d>& out) {
        if (!init->contains(key)) return;
        for (const auto& qj : (*init)[key]) out.push_back(to_vector(qj).head<2>());
      };
      read_pairs("q", cfg.initial.q);
      read_pairs("qdot", cfg.initial.qdot);
      read_pairs("q_ref", cfg.initial.q_ref);
    } catch (const std::exception& ex) {
      fail("initial", ex.what());
    }
  }

  if (errors.empty()) {
    try {
      cfg.validate();
    } catch (const ConfigInvalid& ex) {
      throw ValidationError(ex.what());
    }
    return cfg;
  }
  std::ostringstream msg;
  msg << "invalid scenario config (" << errors.size() << " problem(s)):";
  for (const auto& e : errors) msg << "\n  - " << e;
  throw ValidationError(msg.str());
}

std::string dump_config(const ScenarioConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["graph"]["adjacency"] = from_matrix(cfg.graph.adjacency);
  doc["graph"]["pinning"] = from_vector(cfg.graph.pinning);
  doc["leader"]["omega"] = from_vector(cfg.leader.omega);
  doc["leader"]["e"] = from_matrix(cfg.leader.e_out);
  doc["leader"]["v0"] = from_vector(cfg.leader.v0);
  doc["observer"]["mu1"] = cfg.observer_gains.mu1;
  doc["observer"]["mu2"] = cfg.observer_gains.mu2;
  doc["observer"]["d"] = from_vector(cfg.observer_gains.d);
  doc["mode"] = to_string(cfg.mode);
  if (cfg.mode == SimMode::closed_loop) {
    doc["controller"]["alpha"] =
        cfg.controller_gains.empty() ? 0.0 : cfg.controller_gains.front().alpha;
    doc["controller"]["k"] = json::array();
    for (const auto& g : cfg.controller_gains)
      doc["controller"]["k"].push_back(from_matrix(g.k));
    doc["plants"] = json::array();
    for (const auto& p : cfg.plants) {
      json pj;
      pj["theta"] = from_vector(p.theta);
      pj["g"] = p.gravity;
      doc["plants"].push_back(pj);
    }
  }
  if (!cfg.initial.observer.empty()) {
    doc["initial"]["observer"] = json::array();
    for (const auto& s : cfg.initial.observer) {
      json oj;
      oj["eta_hat"] = from_vector(s.eta_hat);
      oj["omega_hat"] = from_vector(s.omega_hat);
      oj["e_hat"] = from_matrix(s.e_hat);
      doc["initial"]["observer"].push_back(oj);
    }
  }
  const auto write_pairs = [&](const char* key,
                               const std::vector<Eigen::Vector2d>& in) {
    if (in.empty()) return;
    doc["initial"][key] = json::array();
    for (const auto& q : in) doc["initial"][key].push_back(from_vector(q));
  };
  write_pairs("q", cfg.initial.q);
  write_pairs("qdot", cfg.initial.qdot);
  write_pairs("q_ref", cfg.initial.q_ref);
  doc["sim"]["horizon"] = cfg.horizon;
  doc["sim"]["step"] = cfg.step;
  doc["sim"]["record_stride"] = cfg.record_stride;
  doc["sim"]["seed"] = cfg.seed;
  return doc.dump(2) + "\n";
}

}  // namespace cotrack
