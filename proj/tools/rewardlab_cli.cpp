#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "rewardlab/error.hpp"
#include "rewardlab/records.hpp"
#include "rewardlab/reward_config.hpp"
#include "rewardlab/rollout.hpp"
#include "rewardlab/search_sim.hpp"
#include "rewardlab/service.hpp"
#include "rewardlab/templates.hpp"

using namespace rewardlab;

namespace {

RewardConfig load_config(const std::string& path) { return path.empty() ? RewardConfig{} : load_reward_config(path); }

CorpusIndex load_index(const std::string& path) { return build_index(load_corpus(path)); }

// Writes to the named file, or stdout when the name is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorCode::ParseError, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  bool is_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
};

int run_score(const std::string& episodes_path, int stage, const std::string& config_path, const std::string& out) {
  const auto cfg = load_config(config_path);
  const auto hash = config_hash(cfg);
  const auto episodes = load_episodes(episodes_path);
  Sink sink(out);
  for (const auto& rec : episodes) {
    Episode episode{rec.transcript, rec.answers, rec.tool_log ? *rec.tool_log : infer_tool_log(rec.transcript)};
    const auto breakdown = score_episode(episode, static_cast<Stage>(stage), cfg);
    sink.stream() << breakdown_record(breakdown, hash, rec.id).dump() << '\n';
  }
  if (sink.is_file()) std::cout << "scored " << episodes.size() << " episodes, config " << hash << '\n';
  return 0;
}

// Script file: one {"id": qa_id | "*", "turns": [...]} per line.
PolicyFactory script_factory(const std::string& path) {
  std::map<std::string, std::vector<std::string>> scripts;
  for (const auto& j : read_json_lines(path)) {
    scripts[j.at("id").get<std::string>()] = j.at("turns").get<std::vector<std::string>>();
  }
  return [scripts = std::move(scripts)](const QAPair& qa) {
    auto it = scripts.find(qa.id);
    if (it == scripts.end()) it = scripts.find("*");
    return scripted_policy(it == scripts.end() ? std::vector<std::string>{} : it->second);
  };
}

struct EvaluateArgs {
  std::string dataset, corpus, policy_url, script, config, out, results;
  int stage = 1;
  std::uint64_t seed = 0;
  double fault_prob = 0.0;
  std::size_t jobs = 1;
  EpisodeLimits limits;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto dataset = load_qa_dataset(a.dataset);
  const auto index = load_index(a.corpus);
  RolloutOptions options;
  options.config = load_config(a.config);
  options.stage = static_cast<Stage>(a.stage);
  options.limits = a.limits;
  const PolicyFactory factory = a.script.empty()
                                    ? PolicyFactory([url = a.policy_url](const QAPair&) { return http_policy(url); })
                                    : script_factory(a.script);
  const auto report = evaluate(factory, dataset, index, {a.fault_prob, a.seed}, options, a.jobs);

  for (const auto& e : report.episodes) {
    if (e.policy_failure == PolicyFailure::Transport) {
      std::cerr << "error: " << e.policy_detail << '\n';
      return 1;
    }
  }

  const auto hash = config_hash(options.config);
  {
    Sink sink(a.out);
    for (const auto& e : report.episodes) {
      auto rec = breakdown_record(e.breakdown, hash, e.qa_id);
      rec["termination"] = to_string(e.termination);
      sink.stream() << rec.dump() << '\n';
    }
  }
  if (!a.results.empty()) {
    Sink sink(a.results);
    for (const auto& e : report.episodes) sink.stream() << to_json(e).dump() << '\n';
  }
  std::ostream& summary = a.out.empty() ? std::cerr : std::cout;
  summary << std::fixed << std::setprecision(3) << "episodes " << report.episodes.size() << '\n'
          << "accuracy " << report.accuracy << '\n'
          << std::setprecision(6) << "mean_r1 " << report.mean_r1 << '\n'
          << "mean_r2 " << report.mean_r2 << '\n';
  return 0;
}

int run_serve(const std::string& corpus, const std::string& listen, double fault_prob, std::uint64_t seed,
              const std::string& config_path) {
  ServiceConfig config;
  config.rewards = load_config(config_path);
  config.faults = {fault_prob, seed};
  RewardService service(load_index(corpus), config);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected HOST:PORT");
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--listen", "bad port in " + listen);
  }

  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot listen on " << listen << '\n';
    return 1;
  }
  std::cout << "rewardlab serving on " << host << ':' << bound << " corpus_doc_count=" << service.index().size()
            << " config_hash=" << service.config_hash() << std::endl;
  return server.listen() ? 0 : 1;
}

int run_template_render(const std::string& id_name, const std::string& context_path) {
  const auto id = template_from_string(id_name);
  if (!id) {
    std::cerr << "error: unknown template id '" << id_name << "' (expected T1..T5)\n";
    return 2;
  }
  std::ifstream in(context_path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + context_path);
  const auto ctx = context_from_json(nlohmann::json::parse(in));
  std::cout << render(*id, ctx);
  return 0;
}

int run_template_list() {
  for (const auto& d : list_templates()) {
    std::cout << short_name(d.id) << '\t' << long_name(d.id) << '\t' << d.summary << '\t' << d.observation << '\n';
  }
  return 0;
}

int run_corpus_index(const std::string& path, bool stats) {
  const auto index = load_index(path);
  if (stats) {
    std::cout << "documents " << index.size() << '\n'
              << "vocabulary " << index.vocabulary_size() << '\n'
              << std::fixed << std::setprecision(3) << "avg_doc_length " << index.average_length() << '\n';
  } else {
    std::cout << "indexed " << index.size() << " documents\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rewardlab: reward scoring, simulated search tools and rollouts for agentic search RL"};
  app.require_subcommand(1);

  std::string config_path;

  auto* score = app.add_subcommand("score", "Score an episodes file");
  std::string episodes_path, score_out;
  int score_stage = 1;
  score->add_option("--episodes", episodes_path, "Episodes file (one JSON object per line)")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--stage", score_stage, "Training stage")->required()->check(CLI::IsMember({1, 2}));
  score->add_option("--config", config_path, "Reward config (YAML)")->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "Output file for breakdown records (default stdout)");

  auto* eval = app.add_subcommand("evaluate", "Run scored rollouts over a QA dataset");
  EvaluateArgs ea;
  eval->add_option("--dataset", ea.dataset, "QA dataset file")->required()->check(CLI::ExistingFile);
  eval->add_option("--corpus", ea.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  auto* policy_opt = eval->add_option("--policy", ea.policy_url, "Policy endpoint URL");
  auto* script_opt = eval->add_option("--script", ea.script, "Script file")->check(CLI::ExistingFile);
  policy_opt->excludes(script_opt);
  eval->add_option("--stage", ea.stage, "Training stage")->required()->check(CLI::IsMember({1, 2}));
  eval->add_option("--seed", ea.seed, "Fault-injection seed")->required();
  eval->add_option("--fault-prob", ea.fault_prob, "Tool error probability")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--jobs", ea.jobs, "Concurrent episodes")->check(CLI::PositiveNumber);
  eval->add_option("--config", ea.config, "Reward config (YAML)")->check(CLI::ExistingFile);
  eval->add_option("--out", ea.out, "Per-episode breakdown records (default stdout)");
  eval->add_option("--results", ea.results, "Full episode results file");
  eval->add_option("--max-turns", ea.limits.max_assistant_turns)->check(CLI::PositiveNumber);
  eval->add_option("--max-tool-calls", ea.limits.max_tool_calls)->check(CLI::PositiveNumber);
  eval->add_option("--max-bytes", ea.limits.max_total_bytes)->check(CLI::PositiveNumber);

  auto* serve = app.add_subcommand("serve", "Run the HTTP reward service");
  std::string serve_corpus, listen;
  double serve_fault = 0.0;
  std::uint64_t serve_seed = 0;
  serve->add_option("--corpus", serve_corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  serve->add_option("--listen", listen, "HOST:PORT")->required();
  serve->add_option("--fault-prob", serve_fault, "Tool error probability")->check(CLI::Range(0.0, 1.0));
  serve->add_option("--seed", serve_seed, "Fault-injection seed");
  serve->add_option("--config", config_path, "Reward config (YAML)")->check(CLI::ExistingFile);

  auto* tmpl = app.add_subcommand("template", "Prompt templates");
  tmpl->require_subcommand(1);
  auto* render_cmd = tmpl->add_subcommand("render", "Render a template");
  std::string template_id, context_path;
  render_cmd->add_option("--id", template_id, "T1..T5")->required();
  render_cmd->add_option("--context", context_path, "Context JSON file")->required()->check(CLI::ExistingFile);
  auto* list_cmd = tmpl->add_subcommand("list", "List templates");

  auto* corpus = app.add_subcommand("corpus", "Corpus tools");
  corpus->require_subcommand(1);
  auto* index_cmd = corpus->add_subcommand("index", "Build an index");
  std::string corpus_in;
  bool stats = false;
  index_cmd->add_option("--in", corpus_in, "Corpus file")->required()->check(CLI::ExistingFile);
  index_cmd->add_flag("--stats", stats, "Print index statistics");

  try {
    app.parse(argc, argv);
    if (eval->parsed() && ea.policy_url.empty() && ea.script.empty()) {
      throw CLI::RequiredError("--policy or --script");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (score->parsed()) return run_score(episodes_path, score_stage, config_path, score_out);
    if (eval->parsed()) return run_evaluate(ea);
    if (serve->parsed()) return run_serve(serve_corpus, listen, serve_fault, serve_seed, config_path);
    if (render_cmd->parsed()) return run_template_render(template_id, context_path);
    if (list_cmd->parsed()) return run_template_list();
    if (index_cmd->parsed()) return run_corpus_index(corpus_in, stats);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
