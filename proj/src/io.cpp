#include "cno/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace cno::io {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path);
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void check_schema(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("schema_version")) throw IntegrityError(what + ": missing schema_version");
    const auto& v = j["schema_version"];
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
        throw IntegrityError(what + ": unknown schema_version " + v.dump());
    }
}

json space_to_json(const spaces::SchauderSpace& s) {
    json j{{"kind", spaces::to_string(s.kind())}, {"tag", s.tag()}};
    switch (s.kind()) {
        case spaces::Kind::Euclidean: j["dim"] = s.dim(); break;
        case spaces::Kind::WeightedSequence:
            j["weights"] = s.weights();
            j["k_max"] = s.k_max();
            break;
        case spaces::Kind::FourierL2:
            j["horizon"] = s.horizon();
            j["quadrature_intervals"] = s.quadrature_intervals();
            break;
        case spaces::Kind::ChaosL2:
            j["modes"] = s.dim() - 1;
            j["horizon"] = s.horizon();
            break;
    }
    return j;
}

spaces::SchauderSpace space_from_json(const json& j) {
    try {
        const auto kind = spaces::kind_from_string(j.at("kind").get<std::string>());
        std::optional<spaces::SchauderSpace> s;
        switch (kind) {
            case spaces::Kind::Euclidean: s = spaces::SchauderSpace::euclidean(j.at("dim").get<std::size_t>()); break;
            case spaces::Kind::WeightedSequence:
                s = spaces::SchauderSpace::weighted_sequence(j.at("weights").get<std::vector<double>>(),
                                                             j.at("k_max").get<int>());
                break;
            case spaces::Kind::FourierL2:
                s = spaces::SchauderSpace::fourier_l2(j.at("horizon").get<double>(),
                                                      j.at("quadrature_intervals").get<int>());
                break;
            case spaces::Kind::ChaosL2:
                s = spaces::SchauderSpace::chaos_l2(j.at("modes").get<std::size_t>(), j.at("horizon").get<double>());
                break;
        }
        if (j.contains("tag") && j["tag"].get<std::string>() != s->tag()) {
            throw IntegrityError("space descriptor tag does not match its fields");
        }
        return *s;
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("malformed space descriptor: ") + e.what());
    }
}

json spec_to_json(const net::NetSpec& s) { return {{"dims", s.dims}, {"activation", net::to_string(s.activation)}}; }

json file_entry(const std::string& path) {
    const auto bytes = read_file(path);
    return {{"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}};
}

static json spaces_json(const causal::CnoModel& m) {
    json windows = json::array();
    const auto& t = m.grid.times;
    for (std::size_t i = 1; i <= m.horizon(); ++i) {
        const std::size_t first = i > m.M ? i - m.M + 1 : 1;
        windows.push_back({{"index", i},
                           {"input", space_to_json(spaces::SchauderSpace::euclidean(m.M * m.in_dim))},
                           {"input_times", std::vector<double>(t.begin() + static_cast<std::ptrdiff_t>(first),
                                                               t.begin() + static_cast<std::ptrdiff_t>(i) + 1)},
                           {"output", space_to_json(m.out_space)},
                           {"n_out", m.n_out}});
    }
    return {{"schema_version", kSchemaVersion}, {"windows", windows}};
}

void write_bundle(const std::string& dir, const causal::CnoModel& m, const json& extra) {
    fs::create_directories(dir);
    std::ostringstream wb(std::ios::binary);
    weave::write_weave(wb, m.weave);
    write_file(dir + "/weave.bin", wb.str());
    write_file(dir + "/spaces.json", spaces_json(m).dump(2) + "\n");

    json manifest{{"schema_version", kSchemaVersion},
                  {"kind", "cno-bundle"},
                  {"library_version", kLibraryVersion},
                  {"grid", m.grid.times},
                  {"M", m.M},
                  {"in_dim", m.in_dim},
                  {"n_out", m.n_out},
                  {"out_space", space_to_json(m.out_space)},
                  {"Q", m.weave.Q},
                  {"delta", m.weave.delta},
                  {"R", m.weave.R},
                  {"T", m.weave.T},
                  {"synced_spec", spec_to_json(m.synced_spec)},
                  {"seed", m.weave.seed},
                  {"run", extra}};
    json window_seeds = json::array();
    for (std::size_t i = 1; i <= m.horizon(); ++i) window_seeds.push_back(causal::window_seed(m.weave.seed, i));
    manifest["window_seeds"] = window_seeds;
    manifest["files"] = {{"weave.bin", file_entry(dir + "/weave.bin")},
                         {"spaces.json", file_entry(dir + "/spaces.json")}};
    write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

static json load_manifest(const std::string& dir) {
    json manifest;
    try {
        manifest = json::parse(read_file(dir + "/manifest.json"));
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("manifest.json: ") + e.what());
    }
    check_schema(manifest, "manifest.json");
    return manifest;
}

static void verify_files(const std::string& dir, const json& manifest) {
    if (!manifest.contains("files") || !manifest["files"].is_object()) throw IntegrityError("manifest.json: no file list");
    for (const auto& [name, entry] : manifest["files"].items()) {
        const std::string path = dir + "/" + name;
        if (!fs::exists(path)) throw IntegrityError(name + ": missing");
        const auto bytes = read_file(path);
        const auto want = entry.value("sha256", std::string());
        const auto got = sha256_hex(bytes);
        if (got != want) throw IntegrityError(name + ": sha256 " + got + " does not match manifest " + want);
        if (entry.value("bytes", std::size_t{0}) != bytes.size()) throw IntegrityError(name + ": size mismatch");
    }
}

causal::CnoModel read_bundle(const std::string& dir) {
    const auto manifest = load_manifest(dir);
    verify_files(dir, manifest);
    try {
        check_schema(json::parse(read_file(dir + "/spaces.json")), "spaces.json");
        causal::CnoModel m;
        std::istringstream wb(read_file(dir + "/weave.bin"), std::ios::binary);
        m.weave = weave::read_weave(wb);
        m.grid.times = manifest.at("grid").get<std::vector<double>>();
        m.M = manifest.at("M").get<std::size_t>();
        m.in_dim = manifest.at("in_dim").get<std::size_t>();
        m.n_out = manifest.at("n_out").get<std::size_t>();
        m.out_space = space_from_json(manifest.at("out_space"));
        const auto& spec = manifest.at("synced_spec");
        m.synced_spec.dims = spec.at("dims").get<std::vector<std::size_t>>();
        m.synced_spec.activation =
            spec.at("activation").get<std::string>() == "prelu" ? net::Activation::PReLU : net::Activation::ReLU;
        if (net::param_count(m.synced_spec) != m.weave.P) throw IntegrityError("weave.bin: P does not match synced_spec");
        if (m.weave.T != m.grid.steps()) throw IntegrityError("weave.bin: T does not match the grid");
        return m;
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("manifest.json: ") + e.what());
    }
}

json inspect_bundle(const std::string& dir) {
    const auto m = read_bundle(dir);
    const auto& w = m.weave;
    const auto t2 = weave::table2_report(w);
    json j{{"schema_version", kSchemaVersion},
           {"integrity", "ok"},
           {"dims", m.synced_spec.dims},
           {"activation", net::to_string(m.synced_spec.activation)},
           {"P", net::param_count(m.synced_spec)},
           {"Q", w.Q},
           {"delta", w.delta},
           {"T", w.T},
           {"I", weave::horizon_limit(w.Q, w.delta)},
           {"M_T", w.M_T},
           {"M", m.M},
           {"out_space", m.out_space.tag()},
           {"n_out", m.n_out}};
    j["packing"] = {{"points", w.packing.size()},
                    {"min_separation", w.packing.size() > 1 ? weave::min_separation(w.packing) : 0.0},
                    {"aspect_ratio", w.packing.size() > 1 ? weave::aspect_ratio(w.packing) : 0.0}};
    j["table2"] = {{"width_bound", t2.width_bound}, {"width", t2.width},     {"depth_expr", t2.depth_expr},
                   {"depth", t2.depth},             {"params_expr", t2.params_expr}, {"params", t2.params}};
    j["rollout_drift"] = weave::rollout_drift(w);
    return j;
}

std::string format_inspect(const json& s) {
    std::ostringstream os;
    os << "dims        " << s["dims"].dump() << " (" << s["activation"].get<std::string>() << ")\n";
    os << "P([d*])     " << s["P"] << "\n";
    os << "Q, delta    " << s["Q"] << ", " << s["delta"] << "\n";
    os << "T / I       " << s["T"] << " / " << s["I"] << "\n";
    os << "M_T         " << s["M_T"] << "\n";
    os << "memory M    " << s["M"] << "\n";
    os << "output      " << s["out_space"].get<std::string>() << " n_out=" << s["n_out"] << "\n";
    const auto& p = s["packing"];
    os << "packing     " << p["points"] << " points, min sep " << p["min_separation"] << ", aspect "
       << p["aspect_ratio"] << "\n";
    const auto& t = s["table2"];
    os << "width       " << t["width"] << " (bound " << t["width_bound"] << ")\n";
    os << "depth       " << t["depth"] << " (expr " << t["depth_expr"] << ")\n";
    os << "params      " << t["params"] << " (expr " << t["params_expr"] << ")\n";
    os << "drift       " << s["rollout_drift"] << "\n";
    os << "integrity   " << s["integrity"].get<std::string>() << "\n";
    return os.str();
}

}  // namespace cno::io
