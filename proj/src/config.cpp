// SPDX-License-Identifier: Apache-2.0
#include "tandem/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "tandem/error.hpp"

namespace tandem {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& why) { throw Error(ErrorCode::ConfigError, why); }

/// Reads typed keys out of one section and rejects whatever is left over.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.contains(name_)) return;
        if (!doc[name_].is_object()) config_error(name_ + ": expected a table");
        obj_ = doc[name_];
    }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        const json& v = obj_[key];
        const auto bad = [&](const char* want) { config_error(name_ + "." + key + ": expected " + want); };
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) bad("true or false");
            out = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) bad("an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) out = v.get<T>();
                else if (v.get<long long>() < 0) bad("a non-negative integer");
                else out = static_cast<T>(v.get<long long>());
            } else {
                out = v.get<T>();
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) bad("a number");
            out = v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) bad("a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
            if (!v.is_string()) bad("a path string");
            out = v.get<std::string>();
        } else {
            // Arrays of scalars.
            if (!v.is_array()) bad("an array");
            try {
                out = v.get<T>();
            } catch (const json::exception&) {
                bad("an array of the right element type");
            }
        }
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) config_error(name_ + ": unknown key '" + key + "'");
    }

private:
    std::string name_;
    json obj_ = json::object();
    std::set<std::string> seen_;
};

void range(bool ok, const char* what) {
    if (!ok) config_error(what);
}

}  // namespace

AppConfig config_from_json(const json& doc) {
    if (!doc.is_object()) config_error("config must be a table of sections");
    static const std::set<std::string> sections{"world",  "reward",  "learner", "router", "emergency",
                                                "embed",  "planner", "run",     "paths"};
    for (const auto& [key, value] : doc.items())
        if (!sections.count(key)) config_error("unknown section '" + key + "'");

    AppConfig cfg;
    RunConfig& run = cfg.run;
    {
        Section s(doc, "world");
        WorldConfig& w = run.world;
        s.get("width", w.width);
        s.get("height", w.height);
        s.get("trees", w.trees);
        s.get("stone", w.stone);
        s.get("coal", w.coal);
        s.get("iron", w.iron);
        s.get("diamond", w.diamond);
        s.get("water", w.water);
        s.get("sand", w.sand);
        s.get("lava", w.lava);
        s.get("cows", w.cows);
        s.get("zombies", w.zombies);
        s.get("skeletons", w.skeletons);
        s.get("max_health", w.max_health);
        s.get("hostile_damage", w.hostile_damage);
        s.get("hostile_move_prob", w.hostile_move_prob);
        s.get("cow_move_prob", w.cow_move_prob);
        s.get("yields", w.yields);
        s.finish();
    }
    {
        Section s(doc, "reward");
        s.get("gamma1", run.reward.gamma1);
        s.get("gamma2", run.reward.gamma2);
        s.get("gamma3", run.reward.gamma3);
        s.get("beta", run.reward.beta);
        s.finish();
    }
    {
        Section s(doc, "learner");
        s.get("alpha", run.learner.alpha);
        s.get("discount", run.learner.discount);
        s.get("epsilon_start", run.learner.epsilon_start);
        s.get("epsilon_end", run.learner.epsilon_end);
        s.get("decay_fraction", run.learner.decay_fraction);
        s.get("budget", run.learner.budget);
        s.finish();
    }
    {
        Section s(doc, "router");
        s.get("threshold", run.router.threshold);
        s.finish();
    }
    {
        Section s(doc, "emergency");
        s.get("radius", run.emergency.radius);
        s.get("expiry", run.emergency.expiry);
        s.finish();
    }
    {
        Section s(doc, "embed");
        s.get("dimension", run.embed.dimension);
        s.get("hash_seed", run.embed.hash_seed);
        s.get("stopwords", run.embed.stopwords);
        s.finish();
    }
    {
        Section s(doc, "planner");
        RemoteConfig& r = cfg.planner.remote;
        s.get("backend", cfg.planner.backend);
        s.get("transport", cfg.planner.transport);
        s.get("replay", cfg.planner.replay);
        s.get("endpoint", r.endpoint);
        s.get("model", r.model);
        s.get("api_key_env", r.api_key_env);
        s.get("retries", r.retries);
        s.get("timeout_seconds", r.timeout_seconds);
        s.get("backoff_seconds", r.backoff_seconds);
        s.get("fallback_to_oracle", r.fallback_to_oracle);
        s.get("prompt_dir", r.prompt_dir);
        s.get("transcript", r.transcript_path);
        s.finish();
    }
    {
        Section s(doc, "run");
        std::string mode(to_string(run.mode));
        s.get("task", cfg.task);
        s.get("train_tasks", cfg.train_tasks);
        s.get("mode", mode);
        s.get("seed", run.seed);
        s.get("episodes", run.episodes);
        s.get("step_cap", run.step_cap);
        s.get("train_episode_cap", run.train_episode_cap);
        s.get("exploring_starts", run.exploring_starts);
        s.get("probe_episodes", run.probe_episodes);
        s.get("probe_steps", run.probe_steps);
        s.get("curve_points", run.curve_points);
        s.get("curve_episodes", run.curve_episodes);
        s.get("curve_task", run.curve_task);
        s.get("parallel", run.parallel);
        s.finish();
        try {
            run.mode = parse_mode(mode);
        } catch (const Error& e) {
            config_error(std::string("run.mode: ") + e.what());
        }
    }
    {
        Section s(doc, "paths");
        s.get("policy", cfg.paths.policy);
        s.get("memory", cfg.paths.memory);
        s.get("curve", cfg.paths.curve);
        s.get("traces", cfg.paths.traces);
        s.get("metrics", cfg.paths.metrics);
        s.get("metrics_csv", cfg.paths.metrics_csv);
        s.finish();
    }
    run.world.seed = run.seed;
    validate(cfg);
    return cfg;
}

json config_to_json(const AppConfig& cfg) {
    const RunConfig& run = cfg.run;
    const WorldConfig& w = run.world;
    const RemoteConfig& r = cfg.planner.remote;
    json doc;
    doc["world"] = {{"width", w.width},
                    {"height", w.height},
                    {"trees", w.trees},
                    {"stone", w.stone},
                    {"coal", w.coal},
                    {"iron", w.iron},
                    {"diamond", w.diamond},
                    {"water", w.water},
                    {"sand", w.sand},
                    {"lava", w.lava},
                    {"cows", w.cows},
                    {"zombies", w.zombies},
                    {"skeletons", w.skeletons},
                    {"max_health", w.max_health},
                    {"hostile_damage", w.hostile_damage},
                    {"hostile_move_prob", w.hostile_move_prob},
                    {"cow_move_prob", w.cow_move_prob},
                    {"yields", w.yields}};
    doc["reward"] = {{"gamma1", run.reward.gamma1},
                     {"gamma2", run.reward.gamma2},
                     {"gamma3", run.reward.gamma3},
                     {"beta", run.reward.beta}};
    doc["learner"] = {{"alpha", run.learner.alpha},
                      {"discount", run.learner.discount},
                      {"epsilon_start", run.learner.epsilon_start},
                      {"epsilon_end", run.learner.epsilon_end},
                      {"decay_fraction", run.learner.decay_fraction},
                      {"budget", run.learner.budget}};
    doc["router"] = {{"threshold", run.router.threshold}};
    doc["emergency"] = {{"radius", run.emergency.radius}, {"expiry", run.emergency.expiry}};
    doc["embed"] = {{"dimension", run.embed.dimension},
                    {"hash_seed", run.embed.hash_seed},
                    {"stopwords", run.embed.stopwords}};
    doc["planner"] = {{"backend", cfg.planner.backend},
                      {"transport", cfg.planner.transport},
                      {"replay", cfg.planner.replay.string()},
                      {"endpoint", r.endpoint},
                      {"model", r.model},
                      {"api_key_env", r.api_key_env},
                      {"retries", r.retries},
                      {"timeout_seconds", r.timeout_seconds},
                      {"backoff_seconds", r.backoff_seconds},
                      {"fallback_to_oracle", r.fallback_to_oracle},
                      {"prompt_dir", r.prompt_dir.string()},
                      {"transcript", r.transcript_path.string()}};
    doc["run"] = {{"task", cfg.task},
                  {"train_tasks", cfg.train_tasks},
                  {"mode", to_string(run.mode)},
                  {"seed", run.seed},
                  {"episodes", run.episodes},
                  {"step_cap", run.step_cap},
                  {"train_episode_cap", run.train_episode_cap},
                  {"exploring_starts", run.exploring_starts},
                  {"probe_episodes", run.probe_episodes},
                  {"probe_steps", run.probe_steps},
                  {"curve_points", run.curve_points},
                  {"curve_episodes", run.curve_episodes},
                  {"curve_task", run.curve_task},
                  {"parallel", run.parallel}};
    doc["paths"] = {{"policy", cfg.paths.policy.string()},
                    {"memory", cfg.paths.memory.string()},
                    {"curve", cfg.paths.curve.string()},
                    {"traces", cfg.paths.traces.string()},
                    {"metrics", cfg.paths.metrics.string()},
                    {"metrics_csv", cfg.paths.metrics_csv.string()}};
    return doc;
}

std::string render_config(const AppConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.substr(0, eq).find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot == 0 || dot + 1 == eq)
        config_error("override must look like section.key=value: " + std::string(assignment));
    const std::string section(assignment.substr(0, dot));
    const std::string key(assignment.substr(dot + 1, eq - dot - 1));
    const std::string text(assignment.substr(eq + 1));
    json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = text;
    if (!doc.is_object()) doc = json::object();
    if (doc.contains(section) && !doc[section].is_object()) config_error(section + ": expected a table");
    doc[section][key] = std::move(value);
}

AppConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
    json doc = json::object();
    if (!path.empty()) {
        const std::string text = read_text(path);
        doc = json::parse(text, nullptr, false);
        if (doc.is_discarded()) config_error(path.string() + ": not valid JSON");
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

void validate(const AppConfig& cfg) {
    const RunConfig& run = cfg.run;
    try {
        check_config(run.world);
        validate(run.reward);
        validate(run.learner);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        config_error(e.what());
    }
    const auto task_ok = [](int t) { return t >= 1 && t <= static_cast<int>(scenarios().size()); };
    range(task_ok(cfg.task), "run.task must name a scenario (1..10)");
    for (int t : cfg.train_tasks) range(task_ok(t), "run.train_tasks entries must name scenarios (1..10)");
    range(run.episodes >= 1, "run.episodes must be >= 1");
    range(run.step_cap >= 1, "run.step_cap must be >= 1");
    range(run.train_episode_cap >= 1, "run.train_episode_cap must be >= 1");
    range(run.probe_episodes >= 1, "run.probe_episodes must be >= 1");
    range(run.probe_steps >= 1, "run.probe_steps must be >= 1");
    range(run.curve_points >= 0, "run.curve_points must be >= 0");
    range(run.curve_episodes >= 1, "run.curve_episodes must be >= 1");
    range(run.curve_task == 0 || task_ok(run.curve_task), "run.curve_task must be 0 or a scenario id");
    range(run.parallel >= 1 && run.parallel <= 256, "run.parallel must lie in [1, 256]");
    range(run.router.threshold >= 0.0 && run.router.threshold <= 1.0, "router.threshold must lie in [0, 1]");
    range(run.emergency.radius >= -1, "emergency.radius must be >= -1 (-1 disables)");
    range(run.emergency.expiry >= 1, "emergency.expiry must be >= 1");
    check_vocabulary(run.embed);

    const PlannerSettings& p = cfg.planner;
    range(p.backend == "oracle" || p.backend == "remote", "planner.backend must be oracle or remote");
    range(p.transport == "http" || p.transport == "replay", "planner.transport must be http or replay");
    range(p.remote.retries >= 0 && p.remote.retries <= 10, "planner.retries must lie in [0, 10]");
    range(p.remote.timeout_seconds > 0.0, "planner.timeout_seconds must be positive");
    range(p.remote.backoff_seconds >= 0.0, "planner.backoff_seconds must be >= 0");
    range(!p.remote.api_key_env.empty(), "planner.api_key_env must name an environment variable");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
    return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
    json doc = json::parse(read_text(path), nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::CorruptDocument, path.string() + ": not valid JSON");
    return doc;
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

}  // namespace tandem
