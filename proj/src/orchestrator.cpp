// SPDX-License-Identifier: Apache-2.0
#include "tandem/orchestrator.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <thread>

#include "tandem/error.hpp"

namespace tandem {

namespace {

// Stream tags for derive_seed; each consumer owns one.
constexpr std::uint64_t kTrainWorlds = 0x7261696eULL;
constexpr std::uint64_t kTrainAgent = 0x6167656eULL;
constexpr std::uint64_t kEvalWorlds = 0x6576616cULL;
constexpr std::uint64_t kProbeWorlds = 0x70726f62ULL;
constexpr std::uint64_t kCurveWorlds = 0x63757276ULL;
constexpr std::uint64_t kTrainStarts = 0x73746172ULL;

std::uint64_t text_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string compact(const TextualObservation& obs) {
    std::string out;
    char buf[48];
    for (const auto& o : obs.objects) {
        std::snprintf(buf, sizeof buf, "%s@%+d,%+d", o.name.c_str(), o.dx, o.dy);
        out += (out.empty() ? "" : ";") + std::string(buf);
    }
    return out;
}

RewardWeights effective_weights(const RunConfig& cfg, const Wiring& w) {
    RewardWeights r = cfg.reward;
    if (!w.shaped_reward) r.gamma2 = r.gamma3 = 0.0;
    return r;
}

/// All-RL plan used for training and for training-curve checkpoints.
GoalPlan training_plan(const Scenario& s, Mode mode, PlannerBackend& backend, const RunConfig& cfg) {
    GoalPlan plan = plan_for(s, mode, backend, MemorySpace{}, cfg);
    std::fill(plan.tags.begin(), plan.tags.end(), Executor::RL);
    return plan;
}

using StepObserver = std::function<void(const WorldState& before, const ActionCommand& action, const WorldState& after,
                                        const std::optional<AchievementEvent>& event, std::size_t goal)>;

/// Oracle-performer walk through `goals`; returns how many it completed
/// within `cap` steps.
std::size_t scripted_walk(WorldState& state, std::span<const std::string> goals, int cap,
                          const StepObserver& observe = {}) {
    OracleBackend oracle;
    int used = 0;
    for (std::size_t k = 0; k < goals.size(); ++k) {
        while (true) {
            if (used++ >= cap || !state.alive()) return k;
            PerformerScript script;
            try {
                script = oracle.perform_step(goals[k], TextualObservation{}, state);
            } catch (const Error&) {
                return k;
            }
            const WorldState before = observe ? state : WorldState{};
            const auto event = step_in_place(state, script.next_action);
            if (observe) observe(before, script.next_action, state, event, k);
            if (goal_satisfied(event, goals[k])) break;
        }
    }
    return goals.size();
}

}  // namespace

Mode parse_mode(std::string_view text) {
    if (text == "full" || text == "dsadf") return Mode::Full;
    if (text == "variation1") return Mode::Variation1;
    if (text == "variation2") return Mode::Variation2;
    if (text == "variation3") return Mode::Variation3;
    if (text == "variation4") return Mode::Variation4;
    if (text == "variation5") return Mode::Variation5;
    throw Error(ErrorCode::InvalidMode, "unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::Full: return "full";
        case Mode::Variation1: return "variation1";
        case Mode::Variation2: return "variation2";
        case Mode::Variation3: return "variation3";
        case Mode::Variation4: return "variation4";
        case Mode::Variation5: return "variation5";
    }
    return "";
}

Wiring apply_variation(Mode mode) {
    Wiring w;
    switch (mode) {
        case Mode::Full: break;
        case Mode::Variation1:
            w.decompose = w.reflect = w.shaped_reward = w.performer = w.emergency = false;
            break;
        case Mode::Variation2: w.performer = w.emergency = false; break;
        case Mode::Variation3: w.rl = false; break;
        case Mode::Variation4:
            w.decompose = w.reflect = w.rl = false;
            break;
        case Mode::Variation5: w.reflect = false; break;
    }
    return w;
}

GoalPlan plan_for(const Scenario& scenario, Mode mode, PlannerBackend& backend, const MemorySpace& memory,
                  const RunConfig& cfg) {
    const Wiring w = apply_variation(mode);
    GoalPlan plan;
    if (!w.decompose) {
        const ResolvedTarget t = resolve_target(scenario.target);
        plan.target = scenario.target;
        plan.g_init.assign(static_cast<std::size_t>(t.repeat), t.terminal);
        plan.goals = plan.g_init;
        plan.tags = route(plan.goals, memory, cfg.router);
    } else {
        PlannerRequest req{scenario.target, "", "", scenario.start};
        plan = build_plan(backend, req, memory, cfg.router, !w.reflect);
    }
    if (!w.performer) std::fill(plan.tags.begin(), plan.tags.end(), Executor::RL);
    if (!w.rl) std::fill(plan.tags.begin(), plan.tags.end(), Executor::VLM);
    return plan;
}

Assessment probe_proficiency(const PolicyTable& policy, std::string_view task, const RunConfig& cfg) {
    const auto chain = oracle_chain(task);
    const std::span<const std::string> prefix(chain.data(), chain.size() - 1);
    const std::uint64_t stream = derive_seed(cfg.seed, kProbeWorlds, text_hash(task));
    Rng unused(0);
    Assessment out;
    std::uint64_t success_steps = 0;
    for (int i = 0; i < cfg.probe_episodes; ++i) {
        WorldState state = generate_world(cfg.world, derive_seed(stream, 0, static_cast<std::uint64_t>(i)));
        out.batch.episodes += 1;
        if (scripted_walk(state, prefix, cfg.step_cap) < prefix.size()) continue;
        const std::string goal(task);
        for (int t = 0; t < cfg.probe_steps && state.alive(); ++t) {
            const auto obs = caption_observation(state, std::span<const std::string>(&goal, 1));
            const auto f = featurize(obs, state, goal);
            const auto legal = legal_actions(state);
            const auto a = select_action(policy, f, legal, 0.0, unused);
            if (goal_satisfied(step_in_place(state, a), goal)) {
                out.batch.successes += 1;
                success_steps += static_cast<std::uint64_t>(t + 1);
                break;
            }
        }
    }
    if (out.batch.episodes > 0)
        out.p = static_cast<double>(out.batch.successes) / static_cast<double>(out.batch.episodes);
    if (out.batch.successes > 0)
        out.batch.mean_steps = static_cast<double>(success_steps) / static_cast<double>(out.batch.successes);
    return out;
}

TrainResult train(std::span<const int> task_ids, const RunConfig& cfg, PlannerBackend& backend,
                  const ProbeJudge* judge) {
    if (task_ids.empty()) throw Error(ErrorCode::ConfigError, "train needs at least one task");
    validate(cfg.learner);
    validate(cfg.reward);
    check_vocabulary(cfg.embed);
    const Wiring wiring = apply_variation(cfg.mode);
    const RewardWeights weights = effective_weights(cfg, wiring);

    struct Job {
        const Scenario* scenario;
        WorldConfig world;
        GoalPlan plan;
    };
    std::vector<Job> jobs;
    for (int id : task_ids) {
        const Scenario& s = scenario(id);
        Job job{&s, scenario_world(cfg.world, s), training_plan(s, cfg.mode, backend, cfg)};
        check_solvable_for(job.world, job.plan.goals);
        jobs.push_back(std::move(job));
    }
    const Scenario& curve_scenario = scenario(cfg.curve_task > 0 ? cfg.curve_task : task_ids.front());
    const GoalPlan curve_plan = training_plan(curve_scenario, cfg.mode, backend, cfg);
    RunConfig curve_cfg = cfg;
    curve_cfg.emergency.radius = -1;

    TrainResult result;
    Rng rng(derive_seed(cfg.seed, kTrainAgent));
    std::vector<std::string> unlocked_kinds;
    std::uint64_t next_checkpoint = 1;

    const auto checkpoint = [&] {
        CurvePoint point{result.steps, 0, 0};
        for (int j = 0; j < cfg.curve_episodes; ++j) {
            WorldState w = generate_world(scenario_world(cfg.world, curve_scenario),
                                          derive_seed(cfg.seed, kCurveWorlds, static_cast<std::uint64_t>(j)));
            const auto trace = run_episode(std::move(w), curve_plan, result.policy, MemorySpace{}, curve_cfg, backend,
                                           static_cast<std::uint64_t>(j));
            point.episodes += 1;
            point.successes += trace.outcome == Outcome::Success ? 1 : 0;
        }
        result.curve.push_back(point);
    };
    const auto due = [&] {
        return cfg.curve_points > 0 && next_checkpoint <= static_cast<std::uint64_t>(cfg.curve_points) &&
               result.steps * static_cast<std::uint64_t>(cfg.curve_points) >= next_checkpoint * cfg.learner.budget;
    };

    while (result.steps < cfg.learner.budget) {
        const Job& job = jobs[result.episodes % jobs.size()];
        WorldState state = generate_world(job.world, derive_seed(cfg.seed, kTrainWorlds, result.episodes));
        const auto& goals = job.plan.goals;
        EpisodeReward rewarder(goals, weights, cfg.embed);
        std::vector<std::string> unlocked;
        std::size_t k = 0;
        if (cfg.exploring_starts && goals.size() > 1) {
            // Start at a drawn plan position so every goal gets practice; the
            // scripted prefix is not the agent's experience and costs no budget.
            const std::size_t start = derive_seed(cfg.seed, kTrainStarts, result.episodes) % goals.size();
            k = scripted_walk(state, std::span(goals).first(start), cfg.step_cap,
                              [&](const WorldState& b, const ActionCommand& a, const WorldState& s,
                                  const std::optional<AchievementEvent>& e, std::size_t g) { rewarder.step(b, a, s, e, g); });
            if (!state.alive()) {
                result.episodes += 1;
                continue;
            }
        }

        auto obs = caption_observation(state, goals);
        auto features = featurize(obs, state, goals[k]);
        for (int t = 0; t < cfg.train_episode_cap && result.steps < cfg.learner.budget; ++t) {
            const auto legal = legal_actions(state);
            const double eps = epsilon_at(cfg.learner, result.steps);
            const ActionCommand a = select_action(result.policy, features, legal, eps, rng);
            const WorldState before = state;
            const auto event = step_in_place(state, a);
            const RewardBreakdown r = rewarder.step(before, a, state, event, k);
            // Crafting achievements pay the environment's unlock reward the
            // first time per episode; those are what memory records.
            if (event && std::find(unlocked.begin(), unlocked.end(), event->kind) == unlocked.end()) {
                unlocked.push_back(event->kind);
                if (std::find(unlocked_kinds.begin(), unlocked_kinds.end(), event->kind) == unlocked_kinds.end())
                    unlocked_kinds.push_back(event->kind);
            }
            const bool advanced = goal_satisfied(event, goals[k]);
            if (advanced) ++k;
            const bool done = k == goals.size() || !state.alive();
            // Each goal is its own option: completing it ends that skill's return.
            Transition tr{features, a, r.total, {}, advanced || done};
            if (!done) {
                obs = caption_observation(state, goals);
                tr.next = featurize(obs, state, goals[k]);
            }
            update(result.policy, tr, cfg.learner);
            features = tr.next;
            result.steps += 1;
            while (due()) {
                checkpoint();
                ++next_checkpoint;
            }
            if (done) break;
        }
        result.episodes += 1;
    }

    for (const auto& kind : unlocked_kinds) record_rewarded_action(result.memory, AchievementEvent{kind, 0});
    const auto assess = [&](std::string_view task) {
        const Assessment probe = probe_proficiency(result.policy, task, cfg);
        if (!judge) return probe;
        Assessment judged = (*judge)(task, probe.batch);
        judged.batch = probe.batch;
        return judged;
    };
    std::vector<std::string> tasks;
    for (const auto& sub : result.memory.subspaces)
        for (const auto& entry : sub.entries) tasks.push_back(entry.task);
    for (const auto& task : tasks) assess_proficiency(result.memory, task, assess, judge == nullptr);
    return result;
}

EpisodeTrace run_episode(WorldState state, const GoalPlan& plan, const PolicyTable& policy, const MemorySpace& memory,
                         const RunConfig& cfg, PlannerBackend& backend, std::uint64_t episode) {
    const Wiring wiring = apply_variation(cfg.mode);
    const bool emergencies = wiring.emergency && cfg.emergency.radius >= 0;
    EpisodeTrace trace;
    trace.episode = episode;
    trace.plan = plan.goals;
    trace.tags = plan.tags;
    if (plan.goals.empty()) return trace;

    EpisodeReward rewarder(plan.goals, effective_weights(cfg, wiring), cfg.embed);
    Rng unused(0);
    std::size_t k = 0;
    const auto cap = static_cast<std::uint64_t>(cfg.step_cap);

    const auto act = [&](const ActionCommand& a, Executor who, const TextualObservation& obs) {
        const WorldState before = state;
        const auto event = step_in_place(state, a);
        TraceRecord rec;
        rec.step = trace.steps++;
        rec.observation = compact(obs);
        rec.goal = plan.goals[k];
        rec.executor = who;
        rec.action = a;
        rec.reward = rewarder.step(before, a, state, event, k);
        if (event) rec.event = event->kind;
        rec.health = state.health;
        trace.records.push_back(std::move(rec));
        if (goal_satisfied(event, plan.goals[k])) ++k;
    };
    const auto finished = [&] { return k == plan.goals.size() || !state.alive() || trace.steps >= cap; };

    while (!finished()) {
        if (emergencies) {
            if (auto instr = backend.emergency(state, memory, cfg.emergency); instr && is_legal(state, instr->action)) {
                for (std::uint64_t i = 0; i < instr->expiry && !finished(); ++i)
                    act(instr->action, Executor::Emergency, caption_observation(state, plan.goals));
                if (finished()) break;
            }
        }
        const auto obs = caption_observation(state, plan.goals);
        const std::string& goal = plan.goals[k];
        if (plan.tags[k] == Executor::RL) {
            const auto legal = legal_actions(state);
            act(select_action(policy, featurize(obs, state, goal), legal, 0.0, unused), Executor::RL, obs);
        } else {
            ActionCommand a;
            try {
                a = backend.perform_step(goal, obs, state).next_action;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoPathToGoal) throw;
            }
            act(a, Executor::VLM, obs);
        }
    }
    trace.goals_completed = k;
    trace.outcome = k == plan.goals.size() ? Outcome::Success : !state.alive() ? Outcome::Died : Outcome::Failure;
    return trace;
}

EpisodeTrace run_inference(const Scenario& scenario, const PolicyTable& policy, const MemorySpace& memory,
                           const RunConfig& cfg, PlannerBackend& backend, std::uint64_t episode) {
    const GoalPlan plan = plan_for(scenario, cfg.mode, backend, memory, cfg);
    const std::uint64_t seed = derive_seed(cfg.seed, kEvalWorlds, episode);
    auto trace = run_episode(generate_world(scenario_world(cfg.world, scenario), seed), plan, policy, memory, cfg,
                             backend, episode);
    trace.seed = seed;
    return trace;
}

MetricsReport evaluate(const Scenario& scenario, const PolicyTable& policy, const MemorySpace& memory,
                       const RunConfig& cfg, PlannerBackend& backend) {
    if (cfg.episodes < 1) throw Error(ErrorCode::ConfigError, "episodes must be >= 1");
    check_vocabulary(cfg.embed);
    const GoalPlan plan = plan_for(scenario, cfg.mode, backend, memory, cfg);
    const WorldConfig world = scenario_world(cfg.world, scenario);
    check_solvable_for(world, plan.goals);

    std::vector<EpisodeTrace> traces(static_cast<std::size_t>(cfg.episodes));
    const auto run_one = [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(cfg.seed, kEvalWorlds, i);
        traces[i] = run_episode(generate_world(world, seed), plan, policy, memory, cfg, backend, i);
        traces[i].seed = seed;
    };
    const auto workers = static_cast<std::size_t>(std::clamp(cfg.parallel, 1, cfg.episodes));
    if (workers == 1) {
        for (std::size_t i = 0; i < traces.size(); ++i) run_one(i);
    } else {
        // Episodes are independent; striding keeps each index on one thread.
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < traces.size(); i += workers) run_one(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return summarize(std::move(traces), scenario.id, std::string(to_string(cfg.mode)));
}

MetricsReport summarize(std::vector<EpisodeTrace> traces, int task, std::string mode) {
    MetricsReport m;
    m.task = task;
    m.mode = std::move(mode);
    m.episodes = traces.size();
    for (const auto& t : traces) {
        m.successes += t.outcome == Outcome::Success ? 1 : 0;
        m.deaths += t.outcome == Outcome::Died ? 1 : 0;
        m.total_steps += t.steps;
        if (!t.plan.empty())
            m.completion_sum += static_cast<double>(t.goals_completed) / static_cast<double>(t.plan.size());
    }
    if (m.episodes > 0) {
        const auto n = static_cast<double>(m.episodes);
        m.tsr = static_cast<double>(m.successes) / n;
        m.completion_rate = m.completion_sum / n;
        m.survival_rate = static_cast<double>(m.episodes - m.deaths) / n;
        m.mean_steps = static_cast<double>(m.total_steps) / n;
    }
    m.traces = std::move(traces);
    return m;
}

std::string percent_2dp(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return "0.00";
    // Hundredths of a percent, rounded half up in integers.
    const std::uint64_t scaled = (num * 20000 + den) / (2 * den);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(scaled / 100),
                  static_cast<unsigned long long>(scaled % 100));
    return buf;
}

nlohmann::json metrics_json(const MetricsReport& m, std::string_view backend) {
    nlohmann::json outcomes = nlohmann::json::array();
    for (const auto& t : m.traces)
        outcomes.push_back({{"episode", t.episode},
                            {"seed", t.seed},
                            {"outcome", to_string(t.outcome)},
                            {"steps", t.steps},
                            {"goals_completed", t.goals_completed},
                            {"goals_total", t.plan.size()}});
    return {{"version", 1},
            {"task", m.task},
            {"mode", m.mode},
            {"backend", backend},
            {"episodes", m.episodes},
            {"successes", m.successes},
            {"deaths", m.deaths},
            {"total_steps", m.total_steps},
            {"tsr", m.tsr},
            {"tsr_pct", percent_2dp(m.successes, m.episodes)},
            {"completion_rate", m.completion_rate},
            {"survival_rate", m.survival_rate},
            {"survival_pct", percent_2dp(m.episodes - m.deaths, m.episodes)},
            {"mean_steps", m.mean_steps},
            {"outcomes", outcomes}};
}

std::string metrics_csv_header() { return "task,mode,backend,episodes,successes,tsr_pct,completion_pct,survival_pct,mean_steps"; }

std::string metrics_csv_row(const MetricsReport& m, std::string_view backend) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%s,%.*s,%llu,%llu,%s,%.2f,%s,%.2f", m.task, m.mode.c_str(),
                  static_cast<int>(backend.size()), backend.data(), static_cast<unsigned long long>(m.episodes),
                  static_cast<unsigned long long>(m.successes), percent_2dp(m.successes, m.episodes).c_str(),
                  m.completion_rate * 100.0, percent_2dp(m.episodes - m.deaths, m.episodes).c_str(), m.mean_steps);
    return buf;
}

double compute_aosr(std::span<const std::pair<int, int>> trials) {
    if (trials.empty()) throw Error(ErrorCode::EmptyTrials, "AOSR needs at least one trial");
    double sum = 0.0;
    for (const auto& [placed, total] : trials) {
        if (total < 1 || placed < 0 || placed > total)
            throw Error(ErrorCode::ConfigError, "each trial needs 0 <= placed <= total and total >= 1");
        sum += static_cast<double>(placed) / static_cast<double>(total);
    }
    return sum / static_cast<double>(trials.size()) * 100.0;
}

}  // namespace tandem
