#include "config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "slideflow/errors.hpp"

namespace slideflow::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw UsageError("config: key '" + key + "' expects " + expected + ", got '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size())
        bad_value(key, value, "an unsigned integer");
    return v;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) bad_value(key, value, "a real number");
        return v;
    } catch (const std::logic_error&) {
        bad_value(key, value, "a real number");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "a boolean (true|false|1|0)");
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream iss(value);
    while (std::getline(iss, item, ',')) parts.push_back(trim(item));
    return parts;
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    for (const auto& p : split_commas(value)) out.push_back(parse_size(key, p));
    if (out.empty()) bad_value(key, value, "a comma-separated list of unsigned integers");
    return out;
}

std::vector<PriorKind> parse_prior_list(const std::string& key, const std::string& value) {
    std::vector<PriorKind> out;
    for (const auto& p : split_commas(value)) out.push_back(prior_kind_from_string(p));
    if (out.empty()) bad_value(key, value, "a comma-separated list of prior kinds");
    return out;
}

// Shortest decimal that round-trips; avoids locking sidecars to one locale.
std::string fmt_real(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

std::string fmt_list(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::string fmt_priors(const std::vector<PriorKind>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += to_string(v[i]);
    }
    return s;
}

}  // namespace

void RunConfig::finalize() {
    flow.seed = seed;
    synth.seed = seed;
}

void apply_config_entry(RunConfig& rc, const std::string& key, const std::string& value) {
    if (key == "command") return;  // informational echo in sidecars
    if (key == "seed") rc.seed = parse_u64(key, value);
    else if (key == "threads") rc.threads = parse_size(key, value);

    else if (key == "denoiser.layers") rc.denoiser.layers = parse_size(key, value);
    else if (key == "denoiser.heads") rc.denoiser.heads = parse_size(key, value);
    else if (key == "denoiser.hidden") rc.denoiser.hidden = parse_size(key, value);
    else if (key == "denoiser.neighbors") rc.denoiser.neighbors = parse_size(key, value);
    else if (key == "denoiser.dropout") rc.denoiser.dropout = parse_real(key, value);
    else if (key == "denoiser.genes") rc.denoiser.genes = parse_size(key, value);
    else if (key == "denoiser.feature_dim") rc.denoiser.feature_dim = parse_size(key, value);
    else if (key == "denoiser.time_dim") rc.denoiser.time_dim = parse_size(key, value);

    else if (key == "flow.steps") rc.flow.steps = parse_size(key, value);
    else if (key == "flow.learning_rate") rc.flow.learning_rate = parse_real(key, value);
    else if (key == "flow.clip_norm") rc.flow.clip_norm = parse_real(key, value);
    else if (key == "flow.epochs") rc.flow.epochs = parse_size(key, value);
    else if (key == "flow.patience") rc.flow.patience = parse_size(key, value);
    else if (key == "flow.prior") rc.flow.prior.kind = prior_kind_from_string(value);
    else if (key == "flow.zinb.mu") rc.flow.prior.zinb.mu = parse_real(key, value);
    else if (key == "flow.zinb.phi") rc.flow.prior.zinb.phi = parse_real(key, value);
    else if (key == "flow.zinb.pi") rc.flow.prior.zinb.pi = parse_real(key, value);
    else if (key == "flow.log1p_targets") rc.flow.log1p_targets = parse_bool(key, value);

    else if (key == "synth.spots") rc.synth.spots = parse_size(key, value);
    else if (key == "synth.genes") rc.synth.genes = parse_size(key, value);
    else if (key == "synth.feature_dim") rc.synth.feature_dim = parse_size(key, value);
    else if (key == "synth.grid_layout") rc.synth.grid_layout = parse_bool(key, value);
    else if (key == "synth.rho") rc.synth.rho = parse_real(key, value);
    else if (key == "synth.snr") rc.synth.snr = parse_real(key, value);
    else if (key == "synth.neighbors") rc.synth.neighbors = parse_size(key, value);
    else if (key == "synth.map_seed") rc.synth.map_seed = parse_u64(key, value);
    else if (key == "synth.noise.mu") rc.synth.noise.mu = parse_real(key, value);
    else if (key == "synth.noise.phi") rc.synth.noise.phi = parse_real(key, value);
    else if (key == "synth.noise.pi") rc.synth.noise.pi = parse_real(key, value);
    else if (key == "synth.replicates") rc.replicates = parse_size(key, value);

    else if (key == "train.val_count") rc.val_count = parse_size(key, value);
    else if (key == "eval.hvg") rc.hvg_count = parse_size(key, value);
    else if (key == "predict.format") {
        if (value != "slb1" && value != "csv") bad_value(key, value, "slb1 or csv");
        rc.predict_format = value;
    }
    else if (key == "ablate.steps") rc.ablate_steps = parse_size_list(key, value);
    else if (key == "ablate.priors") rc.ablate_priors = parse_prior_list(key, value);
    else if (key == "bench.spots") rc.bench_spots = parse_size_list(key, value);
    else if (key == "bench.repeats") rc.bench_repeats = parse_size(key, value);

    else if (key == "io.data_dir") rc.data_dir = value;
    else if (key == "io.checkpoint") rc.checkpoint = value;
    else if (key == "io.slide") rc.slide = value;
    else if (key == "io.truth") rc.truth = value;
    else if (key == "io.predictions") rc.predictions = value;
    else if (key == "io.out") rc.out = value;

    else throw UsageError("config: unknown key '" + key + "'");
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config: '" + path + "' line " + std::to_string(lineno) +
                             ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError("config: '" + path + "' line " + std::to_string(lineno) +
                             ": empty key");
        try {
            apply_config_entry(base, key, value);
        } catch (const UsageError& e) {
            throw UsageError(std::string(e.what()) + " ('" + path + "' line " +
                             std::to_string(lineno) + ")");
        }
    }
    return base;
}

std::string render_config(const RunConfig& rc, const std::string& command) {
    std::ostringstream out;
    out << "# effective configuration: defaults <- config file <- flag overrides\n";
    out << "command = " << command << "\n";
    out << "seed = " << rc.seed << "\n";
    out << "threads = " << rc.threads << "\n";
    out << "denoiser.layers = " << rc.denoiser.layers << "\n";
    out << "denoiser.heads = " << rc.denoiser.heads << "\n";
    out << "denoiser.hidden = " << rc.denoiser.hidden << "\n";
    out << "denoiser.neighbors = " << rc.denoiser.neighbors << "\n";
    out << "denoiser.dropout = " << fmt_real(rc.denoiser.dropout) << "\n";
    out << "denoiser.genes = " << rc.denoiser.genes << "\n";
    out << "denoiser.feature_dim = " << rc.denoiser.feature_dim << "\n";
    out << "denoiser.time_dim = " << rc.denoiser.time_dim << "\n";
    out << "flow.steps = " << rc.flow.steps << "\n";
    out << "flow.learning_rate = " << fmt_real(rc.flow.learning_rate) << "\n";
    out << "flow.clip_norm = " << fmt_real(rc.flow.clip_norm) << "\n";
    out << "flow.epochs = " << rc.flow.epochs << "\n";
    out << "flow.patience = " << rc.flow.patience << "\n";
    out << "flow.prior = " << to_string(rc.flow.prior.kind) << "\n";
    out << "flow.zinb.mu = " << fmt_real(rc.flow.prior.zinb.mu) << "\n";
    out << "flow.zinb.phi = " << fmt_real(rc.flow.prior.zinb.phi) << "\n";
    out << "flow.zinb.pi = " << fmt_real(rc.flow.prior.zinb.pi) << "\n";
    out << "flow.log1p_targets = " << (rc.flow.log1p_targets ? "true" : "false") << "\n";
    out << "synth.spots = " << rc.synth.spots << "\n";
    out << "synth.genes = " << rc.synth.genes << "\n";
    out << "synth.feature_dim = " << rc.synth.feature_dim << "\n";
    out << "synth.grid_layout = " << (rc.synth.grid_layout ? "true" : "false") << "\n";
    out << "synth.rho = " << fmt_real(rc.synth.rho) << "\n";
    out << "synth.snr = " << fmt_real(rc.synth.snr) << "\n";
    out << "synth.neighbors = " << rc.synth.neighbors << "\n";
    out << "synth.map_seed = " << rc.synth.map_seed << "\n";
    out << "synth.noise.mu = " << fmt_real(rc.synth.noise.mu) << "\n";
    out << "synth.noise.phi = " << fmt_real(rc.synth.noise.phi) << "\n";
    out << "synth.noise.pi = " << fmt_real(rc.synth.noise.pi) << "\n";
    out << "synth.replicates = " << rc.replicates << "\n";
    out << "train.val_count = " << rc.val_count << "\n";
    out << "eval.hvg = " << rc.hvg_count << "\n";
    out << "predict.format = " << rc.predict_format << "\n";
    out << "ablate.steps = " << fmt_list(rc.ablate_steps) << "\n";
    out << "ablate.priors = " << fmt_priors(rc.ablate_priors) << "\n";
    out << "bench.spots = " << fmt_list(rc.bench_spots) << "\n";
    out << "bench.repeats = " << rc.bench_repeats << "\n";
    out << "io.data_dir = " << rc.data_dir << "\n";
    out << "io.checkpoint = " << rc.checkpoint << "\n";
    out << "io.slide = " << rc.slide << "\n";
    out << "io.truth = " << rc.truth << "\n";
    out << "io.predictions = " << rc.predictions << "\n";
    out << "io.out = " << rc.out << "\n";
    return out.str();
}

void write_effective_config(const RunConfig& rc, const std::string& command,
                            const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("config: cannot open '" + path + "' for writing");
    out << render_config(rc, command);
    if (!out) throw DataError("config: write failed for '" + path + "'");
}

}  // namespace slideflow::cli
