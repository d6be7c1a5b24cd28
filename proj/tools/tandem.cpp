// SPDX-License-Identifier: Apache-2.0
// Command-line front end: train, eval, plan, memory inspect.
//
// Exit codes: 0 ok, 1 configuration or usage, 2 planner, 3 I/O or document,
// 4 anything else.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tandem/config.hpp"
#include "tandem/error.hpp"
#include "tandem/orchestrator.hpp"
#include "tandem/remote.hpp"

namespace {

using namespace tandem;

int exit_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidMode:
        case ErrorCode::UnsatisfiableConfig: return 1;
        case ErrorCode::UnknownTarget:
        case ErrorCode::UnknownGoal:
        case ErrorCode::IrreparablePlan:
        case ErrorCode::RemoteProtocolError:
        case ErrorCode::UnparseableReply:
        case ErrorCode::NoPathToGoal:
        case ErrorCode::EvaluatorFailure: return 2;
        case ErrorCode::IoError:
        case ErrorCode::CorruptDocument:
        case ErrorCode::SchemaMismatch: return 3;
        default: return 4;
    }
}

/// Options shared by the commands that read a config.
struct Common {
    std::string config;
    std::vector<std::string> sets;
    /// Flag values already phrased as overrides; applied after --set.
    std::vector<std::string> flags;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON config file (defaults apply when omitted)");
    cmd->add_option("--set", c.sets, "Override a config key, e.g. --set reward.gamma3=0")->take_all();
}

template <class T>
void flag_override(CLI::App* cmd, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
    // CLI11 stores the raw text; it becomes a JSON-typed override at load time.
    cmd->add_option_function<std::string>(
        flag,
        [&c, key](const std::string& v) {
            if constexpr (std::is_same_v<T, std::string>) c.flags.push_back(key + "=" + nlohmann::json(v).dump());
            else c.flags.push_back(key + "=" + v);
        },
        help);
}

AppConfig load(const Common& c) {
    std::vector<std::string> all = c.sets;
    all.insert(all.end(), c.flags.begin(), c.flags.end());
    try {
        AppConfig cfg = load_config(c.config, all);
        if (cfg.planner.backend == "remote" && cfg.run.parallel != 1) {
            // One model conversation at a time.
            std::cerr << "tandem: note: remote backend runs with --parallel 1\n";
            cfg.run.parallel = 1;
        }
        return cfg;
    } catch (const Error& e) {
        // A config that cannot be read is a config problem, not an artifact one.
        if (e.code() == ErrorCode::IoError) throw Error(ErrorCode::ConfigError, e.what());
        throw;
    }
}

struct Backend {
    std::unique_ptr<PlannerBackend> planner;
    RemoteBackend* remote = nullptr;
};

Backend make_backend(const PlannerSettings& p) {
    Backend b;
    if (p.backend == "oracle") {
        b.planner = std::make_unique<OracleBackend>();
        return b;
    }
    std::unique_ptr<Transport> transport;
    if (p.transport == "replay") transport = std::make_unique<ReplayTransport>(p.replay);
    else transport = std::make_unique<HttpTransport>(p.remote);
    auto remote = std::make_unique<RemoteBackend>(std::move(transport), PromptSet::load(p.remote.prompt_dir), p.remote);
    b.remote = remote.get();
    b.planner = std::move(remote);
    return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

int cmd_train(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const AppConfig cfg = load(c);
    std::vector<int> tasks = cfg.train_tasks.empty() ? std::vector<int>{cfg.task} : cfg.train_tasks;
    Backend backend = make_backend(cfg.planner);
    ProbeJudge judge;
    if (backend.remote)
        judge = [&](std::string_view task, const ProbeReport& ev) { return backend.remote->judge_proficiency(task, ev); };
    const TrainResult result = train(tasks, cfg.run, *backend.planner, backend.remote ? &judge : nullptr);

    write_json(cfg.paths.policy, save_policy(result.policy));
    write_json(cfg.paths.memory, save_memory(result.memory));
    std::ostringstream curve;
    curve << "step,successes,episodes,tsr\n";
    for (const auto& p : result.curve)
        curve << p.step << ',' << p.successes << ',' << p.episodes << ',' << percent_2dp(p.successes, p.episodes)
              << '\n';
    write_text(cfg.paths.curve, curve.str());

    std::string ids;
    for (int t : tasks) ids += (ids.empty() ? "" : ",") + std::to_string(t);
    std::cout << "train tasks=" << ids << " mode=" << to_string(cfg.run.mode) << " steps=" << result.steps
              << " episodes=" << result.episodes << " memory_tasks=" << result.memory.size() << '\n';
    std::cout << "wall_time_s=" << format_fixed(seconds_since(t0), 2) << '\n';
    return 0;
}

int cmd_eval(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const AppConfig cfg = load(c);
    const PolicyTable policy = load_policy(read_json(cfg.paths.policy));
    const MemorySpace memory = load_memory(read_json(cfg.paths.memory));
    Backend backend = make_backend(cfg.planner);
    const MetricsReport report = evaluate(scenario(cfg.task), policy, memory, cfg.run, *backend.planner);

    std::string traces;
    for (const auto& trace : report.traces)
        for (const auto& rec : trace.records) traces += to_json(rec, trace.episode).dump() + '\n';
    write_text(cfg.paths.traces, traces);
    write_json(cfg.paths.metrics, metrics_json(report, cfg.planner.backend));
    write_text(cfg.paths.metrics_csv, metrics_csv_header() + '\n' + metrics_csv_row(report, cfg.planner.backend) + '\n');

    const auto deaths = report.deaths;
    std::cout << "task=" << report.task << " mode=" << report.mode << " episodes=" << report.episodes
              << " tsr=" << percent_2dp(report.successes, report.episodes)
              << "% completion=" << format_fixed(report.completion_rate * 100.0, 2)
              << "% survival=" << percent_2dp(report.episodes - deaths, report.episodes)
              << "% mean_steps=" << format_fixed(report.mean_steps, 2) << '\n';
    std::cout << "wall_time_s=" << format_fixed(seconds_since(t0), 2) << '\n';
    return 0;
}

int cmd_plan(const Common& c, const std::string& target, const std::string& memory_path) {
    const AppConfig cfg = load(c);
    Backend backend = make_backend(cfg.planner);
    MemorySpace memory;
    if (!memory_path.empty()) memory = load_memory(read_json(memory_path));
    PlannerRequest req;
    req.target = target;
    const GoalPlan plan = build_plan(*backend.planner, req, memory, cfg.run.router);

    std::cout << "target: " << plan.target << "\ninitial:\n";
    for (std::size_t i = 0; i < plan.g_init.size(); ++i) std::cout << "  " << i + 1 << ". " << plan.g_init[i] << '\n';
    std::cout << "reflection: " << (plan.reflection.verdict() == Verdict::Accept ? "accept" : "revise") << '\n';
    for (const auto& issue : plan.reflection.issues)
        std::cout << "  at " << issue.position + 1 << ": " << issue.description << " -> " << issue.fix << '\n';
    std::cout << "final:\n";
    for (std::size_t i = 0; i < plan.goals.size(); ++i) {
        std::cout << "  " << i + 1 << ". " << plan.goals[i];
        if (!memory_path.empty()) std::cout << "  [" << to_string(plan.tags[i]) << ']';
        std::cout << '\n';
    }
    return 0;
}

int cmd_memory_inspect(const std::string& path) {
    const MemorySpace memory = load_memory(read_json(path));
    struct Row {
        std::string kind;
        const TaskEntry* entry;
    };
    std::vector<Row> rows;
    for (const auto& sub : memory.subspaces)
        for (const auto& e : sub.entries) rows.push_back({sub.kind, &e});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.kind != b.kind ? a.kind < b.kind : a.entry->task < b.entry->task;
    });
    std::printf("%-10s %-22s %6s %8s %9s %10s\n", "subspace", "task", "p", "episodes", "successes", "mean_steps");
    for (const auto& r : rows) {
        const auto& e = *r.entry;
        std::printf("%-10s %-22s %6.3f %8llu %9llu %10.2f\n", r.kind.c_str(), e.task.c_str(), e.p,
                    static_cast<unsigned long long>(e.probe.episodes),
                    static_cast<unsigned long long>(e.probe.successes), e.probe.mean_steps);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tandem: planner-guided reinforcement learning on a crafting gridworld"};
    app.require_subcommand(1);

    Common train_opts, eval_opts, plan_opts;

    CLI::App* train_cmd = app.add_subcommand("train", "Train a policy and build the skill memory");
    add_common(train_cmd, train_opts);
    flag_override<int>(train_cmd, train_opts, "--task", "run.task", "Scenario id (1..10)");
    train_cmd->add_option_function<std::string>(
        "--tasks", [&](const std::string& v) { train_opts.flags.push_back("run.train_tasks=[" + v + "]"); },
        "Comma-separated scenario ids trained together");
    flag_override<std::string>(train_cmd, train_opts, "--mode", "run.mode", "full or variation1..variation5");
    flag_override<int>(train_cmd, train_opts, "--seed", "run.seed", "Base seed");
    flag_override<int>(train_cmd, train_opts, "--budget", "learner.budget", "Training steps");
    flag_override<std::string>(train_cmd, train_opts, "--backend", "planner.backend", "oracle or remote");
    flag_override<std::string>(train_cmd, train_opts, "--policy", "paths.policy", "Policy output");
    flag_override<std::string>(train_cmd, train_opts, "--memory", "paths.memory", "Memory output");
    flag_override<std::string>(train_cmd, train_opts, "--curve", "paths.curve", "Training curve CSV output");

    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a trained policy and memory");
    add_common(eval_cmd, eval_opts);
    flag_override<int>(eval_cmd, eval_opts, "--task", "run.task", "Scenario id (1..10)");
    flag_override<std::string>(eval_cmd, eval_opts, "--mode", "run.mode", "full or variation1..variation5");
    flag_override<int>(eval_cmd, eval_opts, "--seed", "run.seed", "Base seed");
    flag_override<int>(eval_cmd, eval_opts, "--episodes", "run.episodes", "Evaluation episodes");
    flag_override<int>(eval_cmd, eval_opts, "--parallel", "run.parallel", "Worker threads for episodes");
    flag_override<std::string>(eval_cmd, eval_opts, "--backend", "planner.backend", "oracle or remote");
    flag_override<std::string>(eval_cmd, eval_opts, "--policy", "paths.policy", "Policy input");
    flag_override<std::string>(eval_cmd, eval_opts, "--memory", "paths.memory", "Memory input");
    flag_override<std::string>(eval_cmd, eval_opts, "--traces", "paths.traces", "Trace JSONL output");
    flag_override<std::string>(eval_cmd, eval_opts, "--metrics", "paths.metrics", "Metrics JSON output");
    flag_override<std::string>(eval_cmd, eval_opts, "--metrics-csv", "paths.metrics_csv", "Metrics CSV output");

    std::string target, plan_memory;
    CLI::App* plan_cmd = app.add_subcommand("plan", "Decompose, reflect on and route a target");
    add_common(plan_cmd, plan_opts);
    plan_cmd->add_option("target", target, "Target text, e.g. \"craft stone sword\"")->required();
    plan_cmd->add_option("--memory", plan_memory, "Memory document; prints routing tags");
    flag_override<std::string>(plan_cmd, plan_opts, "--backend", "planner.backend", "oracle or remote");

    std::string inspect_path;
    CLI::App* memory_cmd = app.add_subcommand("memory", "Memory document tools");
    memory_cmd->require_subcommand(1);
    CLI::App* inspect_cmd = memory_cmd->add_subcommand("inspect", "Print a memory document as a table");
    inspect_cmd->add_option("path", inspect_path, "memory.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "tandem: error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_opts);
        if (eval_cmd->parsed()) return cmd_eval(eval_opts);
        if (plan_cmd->parsed()) return cmd_plan(plan_opts, target, plan_memory);
        if (inspect_cmd->parsed()) return cmd_memory_inspect(inspect_path);
    } catch (const Error& e) {
        std::cerr << "tandem: error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "tandem: error: " << e.what() << '\n';
        return 4;
    }
    return 1;
}
