// spectrace: specification-to-code traceability mapping tool.
//
// Subcommands:
//   index     scan a repository, extract symbols, generate structure docs
//   map       run the hierarchical mapping pipeline
//   baseline  run the grep or hybrid (BM25 + embeddings) baseline
//   eval      compare run records against ground truth
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectrace/commands.hpp"
#include "spectrace/version.hpp"

namespace {

struct NullBuffer : std::streambuf {
    int overflow(int c) override { return c; }
};

class JsonLogStream {
  public:
    explicit JsonLogStream(bool enabled) : enabled_(enabled) {}
    ~JsonLogStream() { flush(); }

    std::ostream& stream() { return buf_; }

    void flush() {
        std::string text = buf_.str();
        if (text.empty()) return;
        buf_.str("");
        if (!enabled_) {
            std::cerr << text;
            return;
        }
        std::size_t start = 0;
        while (start < text.size()) {
            std::size_t eol = text.find('\n', start);
            if (eol == std::string::npos) eol = text.size();
            std::string line = text.substr(start, eol - start);
            if (!line.empty())
                std::cerr << nlohmann::json{{"level", "info"}, {"message", line}}.dump() << "\n";
            start = eol + 1;
        }
    }

  private:
    bool enabled_;
    std::ostringstream buf_;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectrace — specification-to-code traceability engine"};
    app.set_version_flag("--version", spectrace::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string method = "grep";
    std::string ground_truth;
    std::vector<std::string> run_files;
    bool quiet = false;
    bool json_logs = false;

    app.add_flag("--quiet", quiet, "suppress log output");
    app.add_flag("--json-logs", json_logs, "emit logs as JSON lines on stderr");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration JSON")->required();
        sub->add_option("--out", out_override, "override output directory");
    };

    CLI::App* index_cmd = app.add_subcommand("index", "scan repo and generate structure docs");
    add_common(index_cmd);
    CLI::App* map_cmd = app.add_subcommand("map", "run the hierarchical mapping pipeline");
    add_common(map_cmd);
    CLI::App* baseline_cmd = app.add_subcommand("baseline", "run a baseline method");
    add_common(baseline_cmd);
    baseline_cmd->add_option("--method", method, "grep or hybrid")->required();
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate run records against ground truth");
    eval_cmd->add_option("--ground-truth", ground_truth, "ground truth JSON")->required();
    eval_cmd->add_option("--out", out_override, "output directory for reports");
    eval_cmd->add_option("runs", run_files, "run record JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return 2;
    }

    NullBuffer null_buf;
    std::ostream null_stream(&null_buf);
    JsonLogStream json_log(json_logs);
    std::ostream& log = quiet ? null_stream : json_log.stream();

    try {
        if (eval_cmd->parsed()) {
            std::vector<std::filesystem::path> runs(run_files.begin(), run_files.end());
            std::filesystem::path out =
                out_override.empty() ? std::filesystem::path(".") : out_override;
            spectrace::cmd_eval(runs, ground_truth, out, log);
            json_log.flush();
            return 0;
        }

        spectrace::RunConfig cfg = spectrace::load_run_config(config_path);
        if (!out_override.empty()) cfg.output_dir = out_override;

        if (index_cmd->parsed()) {
            spectrace::cmd_index(cfg, log);
        } else if (map_cmd->parsed()) {
            auto out = spectrace::cmd_map(cfg, log);
            std::cout << out.record_path.string() << "\n";
        } else if (baseline_cmd->parsed()) {
            auto out = spectrace::cmd_baseline(cfg, method, log);
            std::cout << out.record_path.string() << "\n";
        }
        json_log.flush();
        return 0;
    } catch (const spectrace::ConfigError& e) {
        json_log.flush();
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const spectrace::Error& e) {
        json_log.flush();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json_log.flush();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
