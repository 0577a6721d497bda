#include "coevolve/experiment/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "toml.hpp"

#include "coevolve/catalog.hpp"
#include "coevolve/error.hpp"
#include "coevolve/experiment/artifacts.hpp"

namespace coevolve::experiment {

Graphon parse_graphon(std::string_view name) {
  const auto tokens = detail::split_name(name);
  const std::string& head = tokens.front();
  if (head == "product" && tokens.size() == 1) return Graphon::product();
  if (head == "min" && tokens.size() == 1) return Graphon::min();
  if (head == "cosine" && tokens.size() == 1) return Graphon::cosine();
  if (head == "constant" && tokens.size() == 2)
    return Graphon::constant(detail::parse_number(tokens[1], name));
  if (head == "threshold" && tokens.size() == 2)
    return Graphon::threshold(detail::parse_number(tokens[1], name));
  if (head == "step" && tokens.size() >= 3) {
    const double cells = detail::parse_number(tokens[1], name);
    if (!(cells >= 1.0) || cells != std::floor(cells))
      throw ConfigError(fmt::format("step cell count must be a positive integer in '{}'", name));
    const std::size_t prefix = name.find(':', name.find(':') + 1) + 1;
    const Graphon base = parse_graphon(name.substr(prefix));
    return step_graphon(
        sample_pointwise(base, uniform_nodes(static_cast<std::size_t>(cells))));
  }
  throw ConfigError(fmt::format("unknown graphon '{}'", name));
}

bool ExperimentConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

nlohmann::json to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : *a) out.push_back(to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  std::ostringstream os;
  node.visit([&](const auto& n) { os << n; });
  return os.str();
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* node, const std::string& message) const {
    if (node != nullptr && node->source().begin.line > 0)
      throw ConfigError(fmt::format("{}:{}: {}", source_, node->source().begin.line, message));
    throw ConfigError(fmt::format("{}: {}", source_, message));
  }

  void allow(const toml::table& table, const std::string& context,
             std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : table)
      if (std::find(keys.begin(), keys.end(), k.str()) == keys.end())
        fail(&v, fmt::format("unknown key '{}' in {}", k.str(), context));
  }

  const toml::table* table(const toml::table& parent, std::string_view key) const {
    const toml::node* node = parent.get(key);
    if (node == nullptr) return nullptr;
    if (!node->is_table()) fail(node, fmt::format("'{}' must be a table", key));
    return node->as_table();
  }

  std::optional<std::string> string(const toml::table& t, std::string_view key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return std::nullopt;
    if (!node->is_string()) fail(node, fmt::format("'{}' must be a string", key));
    return node->as_string()->get();
  }

  std::optional<double> number(const toml::table& t, std::string_view key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return std::nullopt;
    if (const auto* v = node->as_floating_point()) return v->get();
    if (const auto* v = node->as_integer()) return static_cast<double>(v->get());
    fail(node, fmt::format("'{}' must be a number", key));
  }

  std::optional<std::int64_t> integer(const toml::table& t, std::string_view key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return std::nullopt;
    if (!node->is_integer()) fail(node, fmt::format("'{}' must be an integer", key));
    return node->as_integer()->get();
  }

  std::size_t count(const toml::table& t, std::string_view key, std::size_t fallback,
                    std::int64_t minimum = 1) const {
    const auto v = integer(t, key);
    if (!v) return fallback;
    if (*v < minimum) fail(t.get(key), fmt::format("'{}' must be >= {}", key, minimum));
    return static_cast<std::size_t>(*v);
  }

  std::optional<bool> boolean(const toml::table& t, std::string_view key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return std::nullopt;
    if (!node->is_boolean()) fail(node, fmt::format("'{}' must be a boolean", key));
    return node->as_boolean()->get();
  }

  const toml::array* array(const toml::table& t, std::string_view key) const {
    const toml::node* node = t.get(key);
    if (node == nullptr) return nullptr;
    if (!node->is_array()) fail(node, fmt::format("'{}' must be an array", key));
    return node->as_array();
  }

  std::optional<std::vector<double>> numbers(const toml::table& t, std::string_view key) const {
    const toml::array* a = array(t, key);
    if (a == nullptr) return std::nullopt;
    std::vector<double> out;
    for (const auto& v : *a) {
      if (const auto* f = v.as_floating_point()) out.push_back(f->get());
      else if (const auto* i = v.as_integer()) out.push_back(static_cast<double>(i->get()));
      else fail(&v, fmt::format("'{}' entries must be numbers", key));
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const toml::table& t,
                                                  std::string_view key) const {
    const toml::array* a = array(t, key);
    if (a == nullptr) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& v : *a) {
      if (!v.is_string()) fail(&v, fmt::format("'{}' entries must be strings", key));
      out.push_back(v.as_string()->get());
    }
    return out;
  }

  // Runs a catalog parser and reports its failure at the value's line.
  template <typename F>
  void check(const toml::table& t, std::string_view key, F&& parse) const {
    try {
      parse();
    } catch (const Error& e) {
      fail(t.get(key), e.what());
    }
  }

 private:
  std::string source_;
};

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& source) {
  const std::string source_name = source.string();
  toml::table doc;
  try {
    doc = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", source_name, e.source().begin.line,
                                  e.source().begin.column, e.description()));
  }
  const Reader r(source_name);
  r.allow(doc, "the document",
          {"seed", "system", "initial", "grid", "sizes", "study", "verify", "output"});

  ExperimentConfig cfg;
  cfg.source = source;
  cfg.canonical = to_json(doc);
  cfg.config_hash = sha256_hex(cfg.canonical.dump());

  if (const auto seed = r.integer(doc, "seed")) {
    if (*seed < 0) r.fail(doc.get("seed"), "'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }

  const toml::table* system = r.table(doc, "system");
  if (system == nullptr) r.fail(nullptr, "missing [system] table");
  r.allow(*system, "[system]", {"kernel", "graphon", "dim"});
  const auto kernel = r.string(*system, "kernel");
  if (!kernel) r.fail(system, "[system] needs 'kernel'");
  cfg.kernel_name = *kernel;
  r.check(*system, "kernel", [&] { (void)MemoryKernel::parse(cfg.kernel_name); });
  cfg.graphon_name = r.string(*system, "graphon").value_or("constant:1");
  r.check(*system, "graphon", [&] { (void)parse_graphon(cfg.graphon_name); });
  cfg.dim = r.count(*system, "dim", 1);

  if (const toml::table* grid = r.table(doc, "grid")) {
    r.allow(*grid, "[grid]", {"T", "steps"});
    cfg.t_end = r.number(*grid, "T").value_or(cfg.t_end);
    if (!(cfg.t_end > 0.0)) r.fail(grid->get("T"), "'T' must be > 0");
    cfg.steps = r.count(*grid, "steps", static_cast<std::size_t>(
                                            std::max<long long>(1, std::llround(cfg.t_end * 1000))));
  } else {
    cfg.steps = 1000;
  }

  const toml::table* initial = r.table(doc, "initial");
  if (initial != nullptr) {
    r.allow(*initial, "[initial]", {"mode", "profile", "family", "first", "second"});
    const std::string mode = r.string(*initial, "mode").value_or("grid");
    if (mode == "grid") {
      cfg.initial.mode = InitialSpec::Mode::grid;
    } else if (mode == "sampled") {
      cfg.initial.mode = InitialSpec::Mode::sampled;
    } else {
      r.fail(initial->get("mode"), fmt::format("unknown initial mode '{}'", mode));
    }
    if (const auto p = r.string(*initial, "profile"))
      r.check(*initial, "profile", [&] { cfg.initial.profile = Profile::parse(*p); });
    if (cfg.initial.mode == InitialSpec::Mode::sampled) {
      const auto family = r.string(*initial, "family");
      if (!family) r.fail(initial, "sampled initial data needs 'family'");
      const auto first = r.string(*initial, "first");
      if (!first) r.fail(initial, "sampled initial data needs 'first'");
      std::optional<Profile> p1, p2;
      r.check(*initial, "first", [&] { p1 = Profile::parse(*first); });
      if (const auto second = r.string(*initial, "second"))
        r.check(*initial, "second", [&] { p2 = Profile::parse(*second); });
      if (*family == "dirac") {
        cfg.initial.law = InitialLaw::dirac(*p1);
      } else if (*family == "gaussian" || *family == "uniform") {
        if (!p2) r.fail(initial, fmt::format("family '{}' needs 'second'", *family));
        cfg.initial.law = *family == "gaussian" ? InitialLaw::gaussian(*p1, *p2)
                                                : InitialLaw::uniform(*p1, *p2);
      } else {
        r.fail(initial->get("family"), fmt::format("unknown law family '{}'", *family));
      }
    }
  }
  if (cfg.initial.mode == InitialSpec::Mode::grid && !cfg.initial.profile)
    cfg.initial.profile = Profile::constant(0.0);

  const toml::table* sizes = r.table(doc, "sizes");
  if (sizes != nullptr) {
    r.allow(*sizes, "[sizes]", {"N", "blocks"});
    if (const toml::array* n = r.array(*sizes, "N"))
      for (const auto& v : *n) {
        if (!v.is_integer() || v.as_integer()->get() < 1)
          r.fail(&v, "'N' entries must be positive integers");
        cfg.sizes.push_back(static_cast<std::size_t>(v.as_integer()->get()));
      }
    if (const toml::array* b = r.array(*sizes, "blocks"))
      for (const auto& v : *b) {
        const toml::array* pair = v.as_array();
        if (pair == nullptr || pair->size() != 2 || !(*pair)[0].is_integer() ||
            !(*pair)[1].is_integer() || (*pair)[0].as_integer()->get() < 1 ||
            (*pair)[1].as_integer()->get() < 1)
          r.fail(&v, "'blocks' entries must be [n, m] with positive integers");
        cfg.blocks.emplace_back(static_cast<std::size_t>((*pair)[0].as_integer()->get()),
                                static_cast<std::size_t>((*pair)[1].as_integer()->get()));
      }
  }

  if (const toml::table* study = r.table(doc, "study")) {
    r.allow(*study, "[study]", {"reference", "reference_n"});
    cfg.reference = r.string(*study, "reference").value_or(cfg.reference);
    if (cfg.reference != "continuum" && cfg.reference != "self")
      r.fail(study->get("reference"), "'reference' must be \"continuum\" or \"self\"");
    cfg.reference_n = r.count(*study, "reference_n", 0);
  }

  if (const toml::table* verify = r.table(doc, "verify")) {
    r.allow(*verify, "[verify]",
            {"lipschitz_kernel", "lipschitz_graphons", "particles", "profile", "epsilons",
             "times", "nonlip_kernel", "nonlip_graphon", "nonlip_approximation",
             "fine_particles", "nonlip_epsilons", "nonlip_times", "jitter_seed",
             "lemma_pairs"});
    VerifySpec& v = cfg.verify;
    v.lipschitz_kernel = r.string(*verify, "lipschitz_kernel").value_or(v.lipschitz_kernel);
    r.check(*verify, "lipschitz_kernel", [&] { (void)MemoryKernel::parse(v.lipschitz_kernel); });
    v.lipschitz_graphons = r.strings(*verify, "lipschitz_graphons").value_or(v.lipschitz_graphons);
    r.check(*verify, "lipschitz_graphons", [&] {
      for (const auto& g : v.lipschitz_graphons)
        if (!parse_graphon(g).lipschitz())
          throw ConfigError(fmt::format("graphon '{}' has no Lipschitz constant", g));
    });
    v.particles = r.count(*verify, "particles", v.particles);
    v.profile = r.string(*verify, "profile").value_or(v.profile);
    r.check(*verify, "profile", [&] { (void)Profile::parse(v.profile); });
    v.epsilons = r.numbers(*verify, "epsilons").value_or(v.epsilons);
    v.times = r.numbers(*verify, "times").value_or(v.times);
    v.nonlip_kernel = r.string(*verify, "nonlip_kernel").value_or(v.nonlip_kernel);
    r.check(*verify, "nonlip_kernel", [&] { (void)MemoryKernel::parse(v.nonlip_kernel); });
    v.nonlip_graphon = r.string(*verify, "nonlip_graphon").value_or(v.nonlip_graphon);
    r.check(*verify, "nonlip_graphon", [&] { (void)parse_graphon(v.nonlip_graphon); });
    v.nonlip_approximation =
        r.string(*verify, "nonlip_approximation").value_or(v.nonlip_approximation);
    r.check(*verify, "nonlip_approximation",
            [&] { (void)parse_graphon(v.nonlip_approximation); });
    v.fine_particles = r.count(*verify, "fine_particles", v.fine_particles);
    v.nonlip_epsilons = r.numbers(*verify, "nonlip_epsilons").value_or(v.nonlip_epsilons);
    v.nonlip_times = r.numbers(*verify, "nonlip_times").value_or(v.nonlip_times);
    if (const auto s = r.integer(*verify, "jitter_seed")) v.jitter_seed = static_cast<std::uint64_t>(*s);
    v.lemma_pairs = r.count(*verify, "lemma_pairs", v.lemma_pairs, 0);
    for (const auto* list : {&v.epsilons, &v.nonlip_epsilons})
      for (double e : *list)
        if (!(e >= 0.0)) r.fail(verify, "perturbation sizes must be >= 0");
    for (const auto* list : {&v.times, &v.nonlip_times})
      for (double t : *list)
        if (!(t >= 0.0 && t <= cfg.t_end))
          r.fail(verify, fmt::format("verify time {} outside [0, T]", t));
  }

  if (const toml::table* output = r.table(doc, "output")) {
    r.allow(*output, "[output]", {"directory", "formats", "paranoid"});
    if (const auto d = r.string(*output, "directory")) cfg.output_dir = *d;
    cfg.formats = r.strings(*output, "formats").value_or(cfg.formats);
    for (const auto& f : cfg.formats)
      if (f != "csv" && f != "json" && f != "svg")
        r.fail(output->get("formats"), fmt::format("unknown output format '{}'", f));
    cfg.paranoid = r.boolean(*output, "paranoid").value_or(false);
  }

  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, path);
}

}  // namespace coevolve::experiment
