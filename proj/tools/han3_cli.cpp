// han3: prepare data, train, pre-train, evaluate, predict and explain.

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "han3/app.hpp"
#include "han3/config.hpp"
#include "han3/errors.hpp"

namespace {

using Command = std::function<void(const han3::RunConfig&, std::ostream&, std::ostream&)>;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

struct Sub {
  CLI::App* app;
  Command run;
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Three-level hierarchical attention network for fake news detection"};
  cli.require_subcommand(1);

  const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands = {
      {"prepare", {"tokenize a corpus, build the vocabulary, write encoded splits", han3::cmd_prepare}},
      {"synth", {"write a synthetic labelled corpus", han3::cmd_synth}},
      {"train", {"train a model on prepared splits", han3::cmd_train}},
      {"pretrain", {"pre-train the word level on headlines", han3::cmd_pretrain}},
      {"evaluate", {"print accuracy of a checkpoint on a dataset", han3::cmd_evaluate}},
      {"predict", {"print P(fake) for every input article", han3::cmd_predict}},
      {"explain", {"write an attention heatmap for one article", han3::cmd_explain}},
      {"wordcount", {"bag-of-words / n-gram logistic regression baselines", han3::cmd_wordcount}},
  };

  const auto keys = han3::RunConfig::keys();
  std::vector<Sub> subs;
  subs.reserve(commands.size());
  for (const auto& [name, entry] : commands) {
    subs.push_back({cli.add_subcommand(name, entry.first), entry.second, {}, {}});
    auto& sub = subs.back();
    sub.app->add_option("--config", sub.config_file, "flat key = value config file");
    for (const auto& key : keys) {
      sub.app->add_option_function<std::string>(
          flag_name(key), [&sub, key](const std::string& v) { sub.overrides[key] = v; },
          "override '" + key + "'");
    }
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e);
  }

  for (auto& sub : subs) {
    if (!sub.app->parsed()) continue;
    try {
      han3::RunConfig config;
      if (!sub.config_file.empty()) config.apply_file(sub.config_file);
      for (const auto& key : keys) {
        auto it = sub.overrides.find(key);
        if (it == sub.overrides.end()) continue;
        if (!config.set(key, it->second)) throw han3::ConfigError("unknown key " + key);
      }
      for (const auto& [k, v] : config.entries()) std::cerr << "# " << k << " = " << v << '\n';
      sub.run(config, std::cout, std::cerr);
    } catch (const std::exception& e) {
      std::string message = e.what();
      std::replace(message.begin(), message.end(), '\n', ' ');
      std::cerr << "han3 " << sub.app->get_name() << ": error: " << message << '\n';
      return 1;
    }
  }
  return 0;
}
