#include "Commands.hpp"

#include "semantic_mesh/Benchmark.hpp"
#include "semantic_mesh/DistributionFitting.hpp"
#include "semantic_mesh/Errors.hpp"
#include "semantic_mesh/Evaluation.hpp"
#include "semantic_mesh/FrameBundle.hpp"
#include "semantic_mesh/MapExport.hpp"
#include "semantic_mesh/Pipeline.hpp"
#include "semantic_mesh/Properties.hpp"
#include "semantic_mesh/Simulator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;

namespace semantic_mesh::cli {

namespace {

// A predictive this peaked counts as a confident class in the run summary.
constexpr double kConfidentProbability = 0.99;

void addConfig(CLI::App* sub)
{
  // CLI11 does not apply a config file attached to a subcommand, so the file
  // is merged into the arguments up front (see withConfigArgs).
  sub->add_option("--config", "TOML/INI file with option values; command-line flags take precedence")->type_name("FILE");
}

PropertyModelSet modelsOrDefault(const std::string& path)
{
  return loadModels(path.empty() ? defaultModelsPath() : fs::path(path));
}

void ensureDir(const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

void writeJson(const fs::path& path, const nlohmann::json& j)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions
{
  std::string scenario;
  std::string spec;
  std::uint64_t seed = 0;
  std::string out;
  std::string models;
};

void simulate(const SimulateOptions& o)
{
  sim::WorldSpec world;
  if (!o.spec.empty()) {
    world = sim::loadWorld(o.spec);
    world.seed = o.seed;
  } else {
    const PropertyModelSet models = modelsOrDefault(o.models);
    auto found = sim::scenario(o.scenario, models.catalog, o.seed);
    if (!found) {
      std::string valid;
      for (const auto& n : sim::scenarioNames()) valid += (valid.empty() ? "" : ", ") + n;
      throw ConfigError("unknown scenario '" + o.scenario + "'; valid scenarios: " + valid);
    }
    world = std::move(*found);
  }
  sim::writeSimulation(world, o.out);
  std::cout << "wrote " << world.trajectory.size() << " frames of '" << world.name << "' to " << o.out << '\n';
}

// ---------------------------------------------------------------- run

struct RunOptions
{
  std::string bundle;
  std::string out;
  std::string estimator = "recursive";
  std::string updateMode = "soft";
  double meshSide = 0.0;
  double meshExtent = 0.0;
  double noiseA = SensorNoiseModel{}.a;
  double noiseB = SensorNoiseModel{}.b;
  double noiseC = SensorNoiseModel{}.c;
  bool followCamera = false;
};

void run(const RunOptions& o)
{
  const fs::path dir = o.bundle;
  const BundleCheck check = checkBundle(dir);
  if (!check.ok) {
    std::string where = check.firstFailingFrame ? " (first failing frame " + std::to_string(*check.firstFailingFrame) + ")" : "";
    throw FormatError("malformed bundle" + where + ": " + check.message);
  }
  const BundleManifest manifest = readManifest(dir);

  PipelineConfig config;
  config.estimator = parseEstimatorKind(o.estimator);
  config.updateMode = parseUpdateMode(o.updateMode);
  config.noise = {o.noiseA, o.noiseB, o.noiseC};
  config.followCamera = o.followCamera;
  config.mesh.numClasses = manifest.numClasses;
  config.mesh.sideLength = o.meshSide > 0.0 ? o.meshSide : manifest.suggestedSideLength.value_or(config.mesh.sideLength);
  config.mesh.halfExtent = o.meshExtent > 0.0 ? o.meshExtent : manifest.suggestedHalfExtent.value_or(config.mesh.halfExtent);

  SemanticMapper mapper(config);
  const fs::path out = o.out;
  ensureDir(out);
  std::ofstream timing(out / "timing.csv", std::ios::binary);
  if (!timing) throw ConfigError("cannot write timing log in " + out.string());
  timing << "frame_id,skipped,points,assigned_points,validation_ms,projection_ms,assignment_ms,elevation_ms,"
            "semantics_ms,total_ms\n";

  std::uint64_t producerInvalid = 0;
  for (const FrameEntry& entry : manifest.frames) {
    if (!entry.valid) {
      ++producerInvalid;
      mapper.setFrameCounters(mapper.framesProcessed(), mapper.framesSkipped() + 1);
      timing << entry.frameId << ",1,0,0,0,0,0,0,0,0\n";
      continue;
    }
    const FrameBundle frame = loadFrame(dir, manifest, entry);
    const FrameTiming t = mapper.processFrame(frame);
    timing << t.frameId << ',' << (t.skipped ? 1 : 0) << ',' << t.points << ',' << t.assignedPoints;
    for (double s : {t.validation, t.projection, t.assignment, t.elevation, t.semantics, t.total}) {
      timing << ',' << formatNumber(s * 1e3);
    }
    timing << '\n';
  }

  MapMetadata meta;
  meta.classNames = manifest.classNames;
  meta.estimator = config.estimator;
  meta.updateMode = config.updateMode;
  meta.scenario = manifest.scenario;
  meta.framesProcessed = mapper.framesProcessed();
  meta.framesSkipped = mapper.framesSkipped();
  writeMap(out / "map", mapper.mesh(), meta);

  const Mesh& mesh = mapper.mesh();
  std::size_t observed = 0, confident = 0;
  for (std::size_t f = 0; f < mesh.numFaces(); ++f) {
    if (mesh.faceObservations(f) == 0) continue;
    ++observed;
    const auto belief = config.estimator == EstimatorKind::Recursive ? classPredictive(mesh.alpha(f))
                                                                     : std::optional(std::vector<double>(
                                                                           mesh.latestScores(f).begin(), mesh.latestScores(f).end()));
    if (belief && *std::max_element(belief->begin(), belief->end()) >= kConfidentProbability) ++confident;
  }
  const nlohmann::json summary{
      {"format", "semantic-mesh-run-summary"},
      {"version", 1},
      {"scenario", manifest.scenario},
      {"estimator", toString(config.estimator)},
      {"update_mode", toString(config.updateMode)},
      {"mesh", {{"side_length", config.mesh.sideLength}, {"half_extent", config.mesh.halfExtent}}},
      {"frames_processed", mapper.framesProcessed()},
      {"frames_skipped", mapper.framesSkipped()},
      {"frames_flagged_invalid", producerInvalid},
      {"faces_total", mesh.numFaces()},
      {"faces_observed", observed},
      {"faces_unknown", mesh.numFaces() - observed},
      {"faces_confident", confident},
  };
  writeJson(out / "run_summary.json", summary);
  std::cout << "frames processed " << mapper.framesProcessed() << ", skipped " << mapper.framesSkipped()
            << "; faces observed " << observed << "/" << mesh.numFaces() << ", confident " << confident << '\n';
}

// ---------------------------------------------------------------- eval

struct EvalOptions
{
  std::string truth;
  std::vector<std::string> maps;
  std::string models;
  std::string out;
};

void evaluate(const EvalOptions& o)
{
  fs::path truthPath = o.truth;
  if (fs::is_directory(truthPath)) truthPath /= "truth.json";
  const sim::WorldSpec world = sim::loadWorld(truthPath);
  const PropertyModelSet models = modelsOrDefault(o.models);
  if (models.catalog.names() != world.classNames) {
    throw EvaluationError("property models and truth disagree on the class list");
  }

  std::vector<EvalInput> inputs;
  for (const auto& path : o.maps) {
    MapData map = readMap(path);
    std::string label = toString(map.meta.estimator);
    inputs.push_back({label, std::move(map)});
  }
  if (inputs.empty()) throw EvaluationError("no maps given");
  for (const auto& in : inputs) {
    if (in.map.meta.classNames != world.classNames) {
      throw EvaluationError("map '" + in.label + "' classes do not match the truth");
    }
  }
  const sim::GroundTruth truth = sim::groundTruth(world, inputs.front().map.mesh, models.models);
  const EvalReport report = evaluateMaps(inputs, truth.faceClass, models.models, world.name);
  writeEvalReport(report, o.out);
  std::cout << formatEvalTable(report);
}

// ---------------------------------------------------------------- fitdist

struct FitOptions
{
  std::string logs;
  std::string out;
  double cutoff = 0.0;
  double mass = 0.0;
};

void fitdist(const FitOptions& o)
{
  const fs::path dir = o.logs;
  if (!fs::is_directory(dir)) throw InputError("force log directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no force logs (*.csv) in " + dir.string());

  PropertyModelSet set;
  std::vector<std::string> names;
  std::ostringstream table;
  table << "class,family,param1,param2,ks,applicable,selected\n";
  for (const auto& file : files) {
    const ForceLog log = readForceLog(file, o.mass > 0.0 ? std::optional(o.mass) : std::nullopt);
    const std::vector<double> mu = frictionFromForce(log, o.cutoff);
    const FitReport report = fitAndSelect(mu);
    const std::string name = file.stem().string();
    names.push_back(name);
    const FamilyFit& gauss = report.fit(DistributionFamily::Gaussian);
    set.models.push_back({name, gauss.first, gauss.second});
    for (const auto& fit : report.fits) {
      table << name << ',' << toString(fit.family) << ',' << formatNumber(fit.first) << ',' << formatNumber(fit.second)
            << ',' << formatNumber(fit.ks) << ',' << (fit.applicable ? 1 : 0) << ','
            << (fit.family == report.best ? 1 : 0) << '\n';
    }
  }
  set.catalog = ClassCatalog(names);
  const fs::path out = o.out;
  ensureDir(out);
  saveModels(set, out / "models.txt");
  std::ofstream ks(out / "ks_table.csv", std::ios::binary);
  if (!ks) throw ConfigError("cannot write ks_table.csv");
  ks << table.str();
  std::cout << table.str();
}

// ---------------------------------------------------------------- validate

struct ValidateOptions
{
  std::string bundle;
  std::string map;
  std::string models;
};

void validate(const ValidateOptions& o)
{
  if (o.bundle.empty() && o.map.empty() && o.models.empty()) {
    throw ConfigError("nothing to validate; give --bundle, --map or --models");
  }
  if (!o.bundle.empty()) {
    const BundleCheck check = checkBundle(o.bundle);
    if (!check.ok) {
      std::string where = check.firstFailingFrame ? " (first failing frame " + std::to_string(*check.firstFailingFrame) + ")" : "";
      throw FormatError("bundle invalid" + where + ": " + check.message);
    }
    std::cout << "bundle ok: " << check.framesChecked << " frames checked, " << check.framesInvalid
              << " flagged invalid\n";
  }
  if (!o.map.empty()) {
    const MapData map = readMap(o.map);
    std::cout << "map ok: " << map.mesh.numFaces() << " faces, " << map.meta.framesProcessed << " frames\n";
  }
  if (!o.models.empty()) {
    const PropertyModelSet set = loadModels(o.models);
    std::cout << "models ok: " << set.models.size() << " classes\n";
  }
}

// ---------------------------------------------------------------- bench

struct BenchOptions
{
  int trials = 100;
  std::uint64_t seed = 0;
  std::vector<double> sides{0.01, 0.02, 0.04, 0.08};
  double extent = 0.5;
  std::string out;
};

void bench(const BenchOptions& o)
{
  BenchConfig config;
  config.trials = o.trials;
  config.seed = o.seed;
  config.sideLengths = o.sides;
  config.halfExtent = o.extent;
  const auto rows = benchUpdate(config);
  if (o.out.empty()) {
    writeBenchCsv(std::cout, rows);
    return;
  }
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + o.out);
  writeBenchCsv(out, rows);
  writeBenchCsv(std::cout, rows);
}

}  // namespace

void registerCommands(CLI::App& app)
{
  {
    auto o = std::make_shared<SimulateOptions>();
    CLI::App* sub = app.add_subcommand("simulate", "Render a scenario into a frame-bundle directory with ground truth");
    addConfig(sub);
    auto* scen = sub->add_option("--scenario", o->scenario, "Built-in scenario name");
    auto* spec = sub->add_option("--spec", o->spec, "World spec JSON file")->check(CLI::ExistingFile);
    scen->excludes(spec);
    sub->add_option("--seed", o->seed, "Random seed (required)")->required();
    sub->add_option("--out", o->out, "Output bundle directory")->required();
    sub->add_option("--models", o->models, "Property model file supplying the class catalog");
    sub->callback([o, scen, spec] {
      if (scen->count() == 0 && spec->count() == 0) throw ConfigError("give --scenario or --spec");
      simulate(*o);
    });
  }
  {
    auto o = std::make_shared<RunOptions>();
    CLI::App* sub = app.add_subcommand("run", "Process a frame bundle into a map export");
    addConfig(sub);
    sub->add_option("--bundle", o->bundle, "Input frame-bundle directory")->required();
    sub->add_option("--out", o->out, "Output directory for map, timing log and summary")->required();
    sub->add_option("--estimator", o->estimator, "recursive | unimodal_nonrecursive | multimodal_nonrecursive")
        ->capture_default_str();
    sub->add_option("--update-mode", o->updateMode, "soft | hard")->capture_default_str();
    sub->add_option("--mesh-side", o->meshSide, "Mesh element side length in meters (default: bundle suggestion)");
    sub->add_option("--mesh-extent", o->meshExtent, "Mesh half extent in meters (default: bundle suggestion)");
    sub->add_option("--noise-a", o->noiseA, "Depth noise constant term")->capture_default_str();
    sub->add_option("--noise-b", o->noiseB, "Depth noise linear term")->capture_default_str();
    sub->add_option("--noise-c", o->noiseC, "Depth noise quadratic term")->capture_default_str();
    sub->add_flag("--follow-camera", o->followCamera, "Recenter the mesh under the camera every frame");
    sub->callback([o] { run(*o); });
  }
  {
    auto o = std::make_shared<EvalOptions>();
    CLI::App* sub = app.add_subcommand("eval", "Score map exports against the simulator's ground truth");
    addConfig(sub);
    sub->add_option("--truth", o->truth, "Bundle directory or truth.json")->required();
    sub->add_option("--map", o->maps, "Map export (header .json or stem); repeat for several estimators")->required();
    sub->add_option("--models", o->models, "Property model file (default: shipped friction models)");
    sub->add_option("--out", o->out, "Output directory for the report")->required();
    sub->callback([o] { evaluate(*o); });
  }
  {
    auto o = std::make_shared<FitOptions>();
    CLI::App* sub = app.add_subcommand("fitdist", "Fit property models from per-class force logs (<class>.csv)");
    addConfig(sub);
    sub->add_option("--logs", o->logs, "Directory of force logs")->required();
    sub->add_option("--out", o->out, "Output directory for models.txt and ks_table.csv")->required();
    sub->add_option("--cutoff", o->cutoff, "Low-pass cutoff in Hz; 0 disables filtering")->capture_default_str();
    sub->add_option("--mass", o->mass, "Sled mass in kg, overriding the logs");
    sub->callback([o] { fitdist(*o); });
  }
  {
    auto o = std::make_shared<ValidateOptions>();
    CLI::App* sub = app.add_subcommand("validate", "Check a frame bundle, map export or model file");
    addConfig(sub);
    sub->add_option("--bundle", o->bundle, "Frame-bundle directory");
    sub->add_option("--map", o->map, "Map export header or stem");
    sub->add_option("--models", o->models, "Property model file");
    sub->callback([o] { validate(*o); });
  }
  {
    auto o = std::make_shared<BenchOptions>();
    CLI::App* sub = app.add_subcommand("bench", "Time the per-frame update over mesh element lengths");
    addConfig(sub);
    sub->add_option("--trials", o->trials, "Timed trials per configuration")->capture_default_str();
    sub->add_option("--seed", o->seed, "Random seed for the synthetic frame (required)")->required();
    sub->add_option("--mesh-side", o->sides, "Element side lengths in meters")->capture_default_str();
    sub->add_option("--mesh-extent", o->extent, "Mesh half extent in meters")->capture_default_str();
    sub->add_option("--out", o->out, "CSV output file (also printed)");
    sub->callback([o] { bench(*o); });
  }
}

std::vector<std::string> withConfigArgs(CLI::App& app, std::vector<std::string> args)
{
  if (args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (!sub) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  const auto given = [&](const std::string& flag) {
    return std::any_of(args.begin() + 1, args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub->get_name()}) continue;
    const std::string flag = "--" + item.name;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt || item.name == "config") throw ConfigError("unknown key '" + item.name + "' in " + path);
    if (given(flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (item.inputs.size() == 1 && item.inputs.front() == "true") extra.push_back(flag);
      continue;
    }
    for (const auto& value : item.inputs) {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace semantic_mesh::cli
