// vitalsel: synthesize sessions, extract features, run the multi-objective
// selection and its baselines, and write plot-ready reports.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vitalsel/baselines/rfe.hpp"
#include "vitalsel/evalproto/protocols.hpp"
#include "vitalsel/evalproto/split.hpp"
#include "vitalsel/features/catalog.hpp"
#include "vitalsel/fitness/fitness.hpp"
#include "vitalsel/io.hpp"
#include "vitalsel/nsga2/nsga2.hpp"
#include "vitalsel/preprocess.hpp"
#include "vitalsel/sigsynth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vitalsel;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --out wins, then $VITALSEL_OUT_DIR, then the working directory.
fs::path out_dir(const std::string& flag)
{
    if (!flag.empty()) {
        return flag;
    }
    if (const char* env = std::getenv("VITALSEL_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return ".";
}

template <typename T>
T json_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(std::string("config field '") + key + "': " + e.what());
    }
}

// Options shared by every command that trains models on a feature CSV.
struct ModelFlags {
    std::string features;
    std::optional<std::uint64_t> seed;
    int recognition_trees = 100;
    int identification_trees = 100;
    int stride = 1;
    std::string classifier = "forest";
    std::string mode = "suppress-identity";
    unsigned threads = 1;
    std::uint64_t split_seed = 0;
    bool split_seed_set = false;

    void attach(CLI::App* sub)
    {
        sub->add_option("features", features, "Feature CSV from `extract`")->required();
        sub->add_option("--seed", seed, "Experiment seed (required)");
        sub->add_option("--trees", recognition_trees, "Trees in the recognition forest")->check(CLI::PositiveNumber);
        sub->add_option("--identification-trees", identification_trees, "Trees in the identification forest")->check(CLI::PositiveNumber);
        sub->add_option("--stride", stride, "Keep every n-th training window for recognition")->check(CLI::PositiveNumber);
        sub->add_option("--classifier", classifier, "forest or knn")->check(CLI::IsMember({"forest", "rf", "knn"}));
        sub->add_option("--objective-mode", mode, "suppress-identity or suppress-activity");
        sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
        sub->add_option("--split-seed", split_seed, "Seed of the train/validation/test split (defaults to --seed)")
            ->each([this](const std::string&) { split_seed_set = true; });
    }

    std::uint64_t require_seed() const
    {
        if (!seed) {
            throw UsageError("--seed is required");
        }
        return *seed;
    }

    [[nodiscard]] ObjectiveMode objective_mode() const
    {
        try {
            return parse_objective_mode(mode);
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
    }

    [[nodiscard]] FitnessOptions fitness() const
    {
        auto o = fitness_options(objective_mode());
        o.recognition.forest.n_trees = recognition_trees;
        o.identification.forest.n_trees = identification_trees;
        o.recognition.forest.seed = derive_seed(require_seed(), {0x7265636f67ULL});
        o.identification.forest.seed = derive_seed(require_seed(), {0x6964656e74ULL});
        if (parse_classifier(classifier) == ClassifierKind::Knn) {
            o.recognition.kind = ClassifierKind::Knn;
            o.identification.kind = ClassifierKind::Knn;
        }
        o.recognition_stride = stride;
        return o;
    }

    [[nodiscard]] FeatureMatrix load() const { return impute(io::read_feature_csv(features)); }

    // 42/4/4 on the full cohort; smaller cohorts keep two groups of four.
    [[nodiscard]] SplitSpec split(const FeatureMatrix& data) const
    {
        const auto subjects = data.subjects();
        const int n = static_cast<int>(subjects.size());
        if (n < 9) {
            throw DataError("need at least 9 subjects for a train/validation/test split, found " + std::to_string(n));
        }
        return split_subjects(subjects, split_seed_set ? split_seed : require_seed(), {n - 8, 4, 4});
    }
};

json split_json(const SplitSpec& s)
{
    return {{"train", s.train_subjects}, {"validation", s.validation_subjects}, {"test", s.test_subjects}};
}

std::vector<int> parse_int_list(const std::string& s, const char* what)
{
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            const int v = std::stoi(tok, &used);
            if (used != tok.size() || v < 1) {
                throw std::invalid_argument(tok);
            }
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": '" + tok + "' is not a positive integer");
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string activity_name(int a)
{
    return std::string(to_string(static_cast<Activity>(a)));
}

std::string subject_name(int s)
{
    return "s" + std::to_string(s);
}

void write_report(const fs::path& dir, const ExperimentReport& rep, const json& config, const json& mask, bool wall)
{
    auto j = report_json(rep, wall);
    j["config"] = config;
    if (!mask.is_null()) {
        j["mask"] = mask;
    }
    io::write_json(dir / "report.json", j);
    io::write_text(dir / "recognition_confusion.csv", confusion_csv(rep.recognition_confusion, activity_name));
    if (rep.identification_confusion) {
        io::write_text(dir / "identification_confusion.csv", confusion_csv(*rep.identification_confusion, subject_name));
    }
}

std::optional<FeatureMask> load_mask(const std::string& path, const FeatureMatrix& data)
{
    if (path.empty()) {
        return std::nullopt;
    }
    const auto j = io::read_json(path);
    // Accept a bare mask, an archive pick or an RFE result.
    const auto& m = j.contains("mask") ? j.at("mask") : j;
    return io::mask_from_json(m, data.names());
}

EvalOptions evaluation(const ModelFlags& f, int repeats)
{
    auto e = eval_options(f.fitness());
    e.repeats = repeats;
    e.seed = derive_seed(f.require_seed(), {0x6576616cULL});
    e.threads = f.threads;
    return e;
}

ExperimentReport run_protocol(Protocol p, const FeatureMatrix& data, const std::optional<FeatureMask>& mask, const ModelFlags& f,
                              int repeats)
{
    const auto e = evaluation(f, repeats);
    switch (p) {
    case Protocol::Logo:
        return run_logo(data, mask, e);
    case Protocol::Loso:
        return run_loso(data, mask, e);
    case Protocol::Split:
        return run_split(data, f.split(data), mask, e);
    }
    throw UsageError("unknown protocol");
}

Protocol protocol_of(const std::string& s)
{
    try {
        return parse_protocol(s);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-objective feature selection for vital-sign classification"};
    app.require_subcommand(1);
    std::string out_flag;
    app.add_option("--out", out_flag, "Output directory (else $VITALSEL_OUT_DIR, else .)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic sessions from a JSON config");
    std::string synth_config;
    synth->add_option("config", synth_config, "JSON config with seed, n_subjects, duration_s, sample_rate_hz")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "Window the sessions and write the feature CSV");
    std::string dataset_dir;
    std::string features_out = "features.csv";
    unsigned extract_threads = 1;
    extract->add_option("dataset", dataset_dir, "Directory holding manifest.json")->required();
    extract->add_option("-o,--output", features_out, "File name under the output directory");
    extract->add_option("--threads", extract_threads, "Worker threads (0 = all cores)");

    // select
    auto* select = app.add_subcommand("select", "Run the NSGA-II selection and write the Pareto archive");
    ModelFlags sel;
    sel.attach(select);
    std::string ga_config;
    std::optional<int> pop_size;
    std::optional<int> generations;
    bool surrogate = false;
    std::string telemetry;
    bool wall_time = false;
    select->add_option("--config", ga_config, "JSON GA config (seed, pop_size, generations, ...)");
    select->add_option("--pop-size", pop_size, "Population size")->check(CLI::Range(2, 100000));
    select->add_option("--generations", generations, "Number of generations")->check(CLI::NonNegativeNumber);
    select->add_flag("--surrogate", surrogate, "Use the PCA + 3-NN fitness");
    select->add_option("--telemetry", telemetry, "Append per-generation JSON lines to this file");
    select->add_flag("--wall-time", wall_time, "Include wall-clock times in telemetry and reports");

    // rfe
    auto* rfe_cmd = app.add_subcommand("rfe", "Recursive feature elimination on the activity task");
    ModelFlags rf;
    rf.attach(rfe_cmd);
    std::optional<int> n_target;
    bool cv = false;
    int folds = 5;
    int step = 1;
    rfe_cmd->add_option("--n-target", n_target, "Keep this many features")->check(CLI::PositiveNumber);
    rfe_cmd->add_flag("--cv", cv, "Pick the size by stratified cross-validation");
    rfe_cmd->add_option("--folds", folds, "Folds for --cv")->check(CLI::Range(2, 1000));
    rfe_cmd->add_option("--step", step, "Features dropped per round")->check(CLI::PositiveNumber);

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a mask (or all features) under a protocol");
    ModelFlags ev;
    ev.attach(evaluate_cmd);
    std::string mask_path;
    std::string protocol = "logo";
    int repeats = 20;
    evaluate_cmd->add_option("--mask", mask_path, "Mask JSON; omit for all features");
    evaluate_cmd->add_option("--protocol", protocol, "logo, loso or split")->check(CLI::IsMember({"logo", "loso", "split"}));
    evaluate_cmd->add_option("--repeats", repeats, "LOGO repeats")->check(CLI::PositiveNumber);
    evaluate_cmd->add_flag("--wall-time", wall_time, "Include wall-clock time in the report");

    // compare
    auto* compare = app.add_subcommand("compare", "All features vs RFE vs multi-objective, as one CSV");
    ModelFlags cmp;
    cmp.attach(compare);
    std::string mo_mask;
    std::string rfe_mask;
    compare->add_option("--mo-mask", mo_mask, "Mask JSON from `select`")->required();
    compare->add_option("--rfe-mask", rfe_mask, "Mask JSON from `rfe`");
    compare->add_option("--protocol", protocol, "logo or split")->check(CLI::IsMember({"logo", "split"}));
    compare->add_option("--repeats", repeats, "LOGO repeats")->check(CLI::PositiveNumber);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Population size x generations grid");
    ModelFlags sw;
    sw.attach(sweep);
    std::string pops = "10,50";
    std::string gens = "10,30";
    int sweep_repeats = 10;
    sweep->add_option("--pop-sizes", pops, "Comma-separated population sizes");
    sweep->add_option("--gen-counts", gens, "Comma-separated generation counts");
    sweep->add_option("--repeats", sweep_repeats, "Splits per cell")->check(CLI::PositiveNumber);
    sweep->add_flag("--surrogate", surrogate, "Use the PCA + 3-NN fitness");

    // importance
    auto* importance = app.add_subcommand("importance", "Forest impurity importances for both tasks");
    ModelFlags imp;
    imp.attach(importance);
    int top = 20;
    importance->add_option("--top", top, "Features listed per task")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const fs::path out = out_dir(out_flag);
    try {
        if (*synth) {
            const auto j = io::read_json(synth_config);
            if (!j.is_object() || !j.contains("seed")) {
                throw DataError(synth_config + ": config must be a JSON object with a 'seed' field");
            }
            DatasetConfig cfg;
            cfg.master_seed = json_or<std::uint64_t>(j, "seed", 0);
            cfg.n_subjects = json_or(j, "n_subjects", cfg.n_subjects);
            cfg.duration_s = json_or(j, "duration_s", cfg.duration_s);
            cfg.sample_rate_hz = json_or(j, "sample_rate_hz", cfg.sample_rate_hz);
            cfg.options.guide_hz = json_or(j, "guide_hz", cfg.options.guide_hz);
            cfg.threads = json_or(j, "threads", 1U);
            if (j.contains("activities")) {
                cfg.activities.clear();
                for (const auto& a : j.at("activities")) {
                    cfg.activities.push_back(parse_activity(a.get<std::string>()));
                }
            }
            if (j.contains("positions")) {
                cfg.positions.clear();
                for (const auto& p : j.at("positions")) {
                    cfg.positions.push_back(parse_position(p.get<std::string>()));
                }
            }
            if (cfg.n_subjects < 1 || cfg.duration_s <= 0.0 || cfg.sample_rate_hz <= 0.0) {
                throw DataError(synth_config + ": n_subjects, duration_s and sample_rate_hz must be positive");
            }
            const auto records = synthesize_dataset(cfg);
            json echo = j;
            echo.erase("threads");
            io::write_dataset(out, records, echo);
            std::cout << "wrote " << records.size() << " sessions to " << out.string() << "\n";
            return 0;
        }

        if (*extract) {
            const auto records = io::read_dataset(dataset_dir);
            CatalogConfig cfg;
            cfg.threads = extract_threads;
            const auto fm = extract_records(records, 10.0, 1.0, cfg);
            io::write_feature_csv(out / features_out, fm);
            std::cout << "wrote " << fm.rows() << " rows x " << fm.cols() << " features to " << (out / features_out).string() << "\n";
            return 0;
        }

        if (*select) {
            json cfgj = ga_config.empty() ? json::object() : io::read_json(ga_config);
            if (!sel.seed && cfgj.contains("seed")) {
                sel.seed = json_or<std::uint64_t>(cfgj, "seed", 0);
            }
            if (!sel.seed) {
                throw UsageError("a seed is required (--seed or 'seed' in --config)");
            }
            const auto data = sel.load();
            const auto split = sel.split(data);
            auto fo = sel.fitness();
            fo.surrogate = surrogate || json_or(cfgj, "surrogate", false);
            GaConfig ga;
            ga.seed = *sel.seed;
            ga.population_size = pop_size.value_or(json_or(cfgj, "pop_size", ga.population_size));
            ga.max_generations = generations.value_or(json_or(cfgj, "generations", ga.max_generations));
            ga.crossover_rate = json_or(cfgj, "crossover_rate", ga.crossover_rate);
            ga.mutation_rate = json_or(cfgj, "mutation_rate", ga.mutation_rate);
            ga.normalized_crowding = json_or(cfgj, "normalized_crowding", ga.normalized_crowding);
            ga.objective_mode = fo.objective_mode;
            ga.threads = sel.threads;
            ga.validate();

            const auto ctx = FitnessContext::build(data, split, Stage::Selection, fo);
            std::unique_ptr<std::FILE, int (*)(std::FILE*)> tlog(nullptr, &std::fclose);
            if (!telemetry.empty()) {
                const fs::path tp = telemetry;
                if (tp.has_parent_path()) {
                    fs::create_directories(tp.parent_path());
                }
                tlog.reset(std::fopen(telemetry.c_str(), "a"));
                if (!tlog) {
                    throw DataError("cannot open telemetry file " + telemetry);
                }
            }
            const auto archive = evolve(ga, data.cols(), make_fitness(ctx), [&](const GenerationStats& s, const ParetoArchive&) {
                if (tlog) {
                    const auto line = io::telemetry_line(s, wall_time);
                    std::fputs(line.c_str(), tlog.get());
                    std::fflush(tlog.get());
                }
            });

            const auto& pick = pick_solution(archive);
            auto aj = io::archive_json(archive, data.names(), ga.objective_mode);
            aj["config"] = {{"seed", ga.seed},
                            {"pop_size", ga.population_size},
                            {"generations", ga.max_generations},
                            {"surrogate", fo.surrogate},
                            {"recognition_trees", fo.recognition.forest.n_trees},
                            {"identification_trees", fo.identification.forest.n_trees},
                            {"stride", fo.recognition_stride},
                            {"classifier", sel.classifier}};
            aj["split"] = split_json(split);
            io::write_json(out / "archive.json", aj);

            // The chosen member, scored once on the test group.
            const auto rep = run_split(data, split, pick.mask, evaluation(sel, 1));
            json pj = io::individual_json(pick, data.names());
            pj["test_recognition"] = rep.recognition_accuracy;
            pj["test_identification"] = *rep.identification_accuracy;
            io::write_json(out / "selected_mask.json", pj);
            std::cout << "archive of " << archive.size() << " masks; picked " << pick.mask.count() << " features, test recognition "
                      << format_double(rep.recognition_accuracy) << ", identification " << format_double(*rep.identification_accuracy)
                      << "\n";
            return 0;
        }

        if (*rfe_cmd) {
            if (cv == n_target.has_value()) {
                throw UsageError("give exactly one of --n-target or --cv");
            }
            const auto data = rf.load();
            const auto split = rf.split(data);
            const auto fo = rf.fitness();
            std::set<int> train(split.train_subjects.begin(), split.train_subjects.end());
            std::vector<std::size_t> rows;
            std::vector<int> labels;
            std::size_t seen = 0;
            for (std::size_t r = 0; r < data.rows(); ++r) {
                const auto& l = data.labels()[r];
                if (train.contains(l.subject) && seen++ % static_cast<std::size_t>(rf.stride) == 0) {
                    rows.push_back(r);
                    labels.push_back(static_cast<int>(l.activity));
                }
            }
            RfeOptions ro;
            ro.step = step;
            ro.forest = fo.recognition.forest;
            ro.forest.max_features = 0;
            ro.forest.threads = rf.threads;
            const Eigen::MatrixXd x = take_rows(data.values(), rows);
            json result;
            if (cv) {
                const auto res = rfe_cv(x, labels, folds, rf.require_seed(), ro, 1);
                result["mask"] = io::mask_json(res.mask, data.names());
                result["chosen_size"] = res.chosen_size;
                result["grid"] = res.grid;
                result["mean_accuracy"] = res.mean_accuracy;
            } else {
                if (static_cast<std::size_t>(*n_target) > data.cols()) {
                    throw UsageError("--n-target exceeds the " + std::to_string(data.cols()) + " features in the catalog");
                }
                result["mask"] = io::mask_json(rfe(x, labels, static_cast<std::size_t>(*n_target), ro), data.names());
            }
            result["config"] = {{"seed", rf.require_seed()}, {"trees", ro.forest.n_trees}, {"step", step}, {"stride", rf.stride}};
            result["split"] = split_json(split);
            io::write_json(out / "rfe_mask.json", result);
            std::cout << "kept " << result["mask"]["count"].get<std::size_t>() << " features\n";
            return 0;
        }

        if (*evaluate_cmd) {
            ev.require_seed();
            const auto data = ev.load();
            const auto mask = load_mask(mask_path, data);
            const auto p = protocol_of(protocol);
            const auto rep = run_protocol(p, data, mask, ev, repeats);
            const json config{{"seed", *ev.seed},
                              {"protocol", protocol},
                              {"repeats", repeats},
                              {"objective_mode", ev.mode},
                              {"trees", ev.recognition_trees},
                              {"identification_trees", ev.identification_trees},
                              {"stride", ev.stride}};
            write_report(out, rep, config, mask ? io::mask_json(*mask, data.names()) : json(nullptr), wall_time);
            std::cout << to_string(p) << ": recognition " << format_double(rep.recognition_accuracy);
            if (rep.identification_accuracy) {
                std::cout << ", identification " << format_double(*rep.identification_accuracy);
            }
            std::cout << "\n";
            return 0;
        }

        if (*compare) {
            cmp.require_seed();
            const auto data = cmp.load();
            const auto p = protocol_of(protocol);
            std::vector<ComparisonRow> rows;
            auto add = [&](const std::string& name, const std::optional<FeatureMask>& m) {
                const auto rep = run_protocol(p, data, m, cmp, repeats);
                rows.push_back({name, rep.n_features, rep.recognition_accuracy, *rep.identification_accuracy});
            };
            add("all_features", std::nullopt);
            if (!rfe_mask.empty()) {
                add("rfe", load_mask(rfe_mask, data));
            }
            add("multi_objective", load_mask(mo_mask, data));
            io::write_text(out / "comparison.csv", comparison_csv(rows));
            std::cout << comparison_csv(rows);
            return 0;
        }

        if (*sweep) {
            SweepOptions so;
            so.seed = sw.require_seed();
            so.repeats = sweep_repeats;
            so.fitness = sw.fitness();
            so.fitness.surrogate = surrogate;
            so.ga.threads = sw.threads;
            const auto data = sw.load();
            const auto rows = sweep_ga(data, parse_int_list(pops, "--pop-sizes"), parse_int_list(gens, "--gen-counts"), so);
            io::write_text(out / "sweep.csv", sweep_csv(rows));
            std::cout << sweep_csv(rows);
            return 0;
        }

        if (*importance) {
            const auto data = imp.load();
            const auto split = imp.split(data);
            const auto fo = imp.fitness();
            const auto ctx = FitnessContext::build(data, split, Stage::Report, fo);
            auto cfg_r = fo.recognition.forest;
            auto cfg_i = fo.identification.forest;
            cfg_r.max_features = 0;
            cfg_i.max_features = 0;
            cfg_r.threads = cfg_i.threads = imp.threads;
            const auto mr = forest_fit(ctx.recognition().train, ctx.recognition().train_labels, cfg_r);
            const auto mi = forest_fit(ctx.identification().train, ctx.identification().train_labels, cfg_i);
            std::string csv = "task,rank,feature,importance\n";
            auto emit = [&](const char* task, const std::vector<double>& w) {
                std::vector<std::size_t> order(w.size());
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
                for (std::size_t k = 0; k < std::min<std::size_t>(static_cast<std::size_t>(top), order.size()); ++k) {
                    csv += std::string(task) + "," + std::to_string(k + 1) + "," + data.names()[order[k]] + "," + format_double(w[order[k]]) +
                           "\n";
                }
            };
            emit("recognition", feature_importances(mr));
            emit("identification", feature_importances(mi));
            io::write_text(out / "importance.csv", csv);
            std::cout << csv;
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
