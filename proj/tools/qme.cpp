// Command-line front end: elicit, benchmark, serve, sphere.

#include "qme/experiments.hpp"
#include "qme/fair.hpp"
#include "qme/geometry.hpp"
#include "qme/lpme.hpp"
#include "qme/qpme.hpp"
#include "qme/server.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;
using namespace qme;

json to_array(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write " + path);
  out << text;
}

struct ElicitOptions {
  std::string mode = "quadratic";
  int k = 2;
  int m = 2;
  double rho = 0.2;
  std::optional<double> varrho;
  double epsilon = 1e-2;
  std::string oracle = "simulated";
  std::uint64_t seed = 0;
  std::string metric;
  std::string tau;
  bool lambda_check = false;
  double noise = 0.0;
  std::string noise_mode = "truthful";
  std::string out;
  std::string transcript;
};

int run_elicit(const ElicitOptions& o) {
  const NoiseConfig noise{o.noise, parse_noise_mode(o.noise_mode), o.seed};
  std::optional<MetricDocument> given;
  if (!o.metric.empty()) given = load_metric(o.metric);

  QpmeConfig q;
  q.rho = o.rho;
  q.varrho = o.varrho;
  q.epsilon = o.epsilon;

  Transcript transcript;
  json summary;
  summary["mode"] = o.mode;
  summary["seed"] = o.seed;
  MetricDocument elicited;

  if (o.mode == "linear" || o.mode == "quadratic") {
    QuadraticMetric truth;
    if (given) {
      truth = std::get<QuadraticMetric>(given->metric);
    } else {
      truth = o.mode == "linear" ? random_linear_metric(o.k, o.seed)
                                 : random_metric(o.k, o.seed);
    }
    SimulatedOracle simulated(truth, noise);
    TranscribingOracle oracle(simulated, transcript);
    QuadraticMetric result;
    if (o.mode == "linear") {
      const Sphere ball{Vector::Constant(truth.dim(), 1.0 / truth.dim()), o.rho};
      const LpmeResult r = lpme(LpmeConfig{o.epsilon, 3, ball}, oracle);
      result = {r.weights, Matrix::Zero(truth.dim(), truth.dim())};
      summary["queries"] = r.queries;
      summary["a_error"] = (r.weights - truth.a.normalized()).norm();
    } else {
      const QpmeResult r = qpme(q, oracle);
      result = r.metric;
      summary["queries"] = r.queries;
      summary["a_error"] = (r.metric.a - truth.a).norm();
      summary["B_error"] = (r.metric.B - truth.B).norm();
    }
    elicited.metric = result;
  } else if (o.mode == "fair") {
    FairQuadraticMetric truth;
    std::optional<GroupModel> gm;
    if (given) {
      truth = std::get<FairQuadraticMetric>(given->metric);
      gm = given->groups;
    } else {
      truth = random_fair_metric(o.k, o.m, o.seed);
    }
    if (!o.tau.empty()) gm = load_group_model(o.tau);
    if (!gm) gm = random_group_model(truth.dim(), truth.groups, o.seed);
    FairOracle simulated(truth, *gm, noise);
    TranscribingGroupOracle oracle(simulated, transcript);
    FairConfig fc;
    fc.qpme = q;
    fc.lambda_check = o.lambda_check;
    const FairResult r = fair_qpme(fc, oracle, *gm);
    summary["queries"] = r.queries;
    summary["a_error"] = (r.metric.a - truth.a).norm();
    double b_error = 0.0;
    for (std::size_t p = 0; p < truth.violations.size(); ++p) {
      b_error += (r.metric.violations[p] - truth.violations[p]).norm();
    }
    summary["B_error"] = b_error;
    summary["lambda"] = r.metric.lambda;
    summary["lambda_error"] = std::abs(r.metric.lambda - truth.lambda);
    if (r.lambda_search) {
      summary["lambda_search"] = *r.lambda_search;
      summary["lambda_search_error"] = std::abs(*r.lambda_search - truth.lambda);
    }
    elicited = {r.metric, *gm};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown mode: " + o.mode);
  }

  summary["metric"] = json::parse(to_json(elicited, -1));
  if (!o.out.empty()) save_metric(o.out, elicited);
  if (!o.transcript.empty()) transcript.save(o.transcript);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

SessionServer* active_server = nullptr;

void handle_signal(int) {
  if (active_server) active_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric elicitation from pairwise preferences"};
  app.require_subcommand(1);

  ElicitOptions eo;
  auto* elicit = app.add_subcommand("elicit", "Elicit a metric from a simulated oracle");
  elicit->add_option("--mode", eo.mode, "linear, quadratic or fair")
      ->check(CLI::IsMember({"linear", "quadratic", "fair"}));
  elicit->add_option("-k", eo.k, "Number of classes")->check(CLI::Range(2, 1000));
  elicit->add_option("-m", eo.m, "Number of groups (fair)")->check(CLI::Range(2, 1000));
  elicit->add_option("--rho", eo.rho, "Radius of the query ball");
  elicit->add_option("--varrho", eo.varrho, "Radius of the local balls");
  elicit->add_option("--epsilon", eo.epsilon, "Binary-search tolerance");
  elicit->add_option("--oracle", eo.oracle, "Oracle kind")
      ->check(CLI::IsMember({"simulated"}));
  elicit->add_option("--seed", eo.seed, "Seed for the random metric and noise");
  elicit->add_option("--metric", eo.metric, "Metric JSON for the oracle")
      ->check(CLI::ExistingFile);
  elicit->add_option("--tau", eo.tau, "Group prevalences JSON (fair)")
      ->check(CLI::ExistingFile);
  elicit->add_flag("--lambda-check", eo.lambda_check,
                   "Also run the one-dimensional trade-off search");
  elicit->add_option("--noise", eo.noise, "Oracle noise band");
  elicit->add_option("--noise-mode", eo.noise_mode, "truthful, flip or seeded_random");
  elicit->add_option("--out", eo.out, "Write the elicited metric JSON");
  elicit->add_option("--transcript", eo.transcript, "Write the query transcript (JSONL)");

  std::optional<int> figure, table;
  int trials = 0;
  std::string report = "-";
  auto* bench = app.add_subcommand("benchmark", "Reproduce figures and tables as CSV");
  auto* fig_opt = bench->add_option("--figure", figure, "4, 6, 7 or 8")
                      ->check(CLI::IsMember({4, 6, 7, 8}));
  auto* tab_opt = bench->add_option("--table", table, "1, 2 or 3")
                      ->check(CLI::IsMember({1, 2, 3}));
  fig_opt->excludes(tab_opt);
  bench->add_option("--trials", trials, "Trials per configuration")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--out", report, "CSV path ('-' for stdout)");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_mode = "quadratic";
  int serve_k = 2;
  int serve_m = 2;
  double serve_eps = kHumanTolerance;
  std::vector<double> priors;
  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--mode", serve_mode, "Default session mode")
      ->check(CLI::IsMember({"linear", "quadratic", "fair"}));
  serve->add_option("-k", serve_k, "Default number of classes")->check(CLI::Range(2, 1000));
  serve->add_option("-m", serve_m, "Default number of groups")->check(CLI::Range(2, 1000));
  serve->add_option("--epsilon", serve_eps, "Default binary-search tolerance");
  serve->add_option("--priors", priors, "Class priors, comma separated")->delimiter(',');

  std::string space_path;
  auto* sphere = app.add_subcommand("sphere", "Find the query ball for a rate space");
  sphere->add_option("--space", space_path, "Rate space JSON")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*elicit) return run_elicit(eo);
    if (*bench) {
      if (!figure && !table) throw CLI::RequiredError("--figure or --table");
      write_text(report, figure ? figure_csv(*figure, trials) : table_csv(*table, trials));
      return 0;
    }
    if (*serve) {
      SessionConfig defaults;
      defaults.mode = parse_session_mode(serve_mode);
      defaults.k = serve_k;
      defaults.groups = serve_m;
      defaults.epsilon = serve_eps;
      if (!priors.empty()) {
        defaults.priors = Eigen::Map<const Vector>(
            priors.data(), static_cast<Eigen::Index>(priors.size()));
      }
      validate(defaults);
      SessionServer server(defaults);
      active_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "listening on http://" << host << ':' << port << '\n';
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot bind " << host << ':' << port << '\n';
        return 1;
      }
      return 0;
    }
    if (*sphere) {
      const Sphere s = find_sphere(load_rate_space(space_path));
      std::cout << json{{"center", to_array(s.center)}, {"radius", s.radius}}.dump(2)
                << '\n';
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
