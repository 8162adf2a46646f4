#include "config.hpp"

#include "isoshell/error.hpp"

#include <fstream>
#include <set>

namespace isoshell::cli {

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw Error(ErrorKind::SchemaError, where + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!keys.count(k)) throw Error(ErrorKind::SchemaError, "unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

int axis_index(const json& a) {
    if (a.is_number_integer()) return a.get<int>();
    const std::string s = a.get<std::string>();
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
    throw Error(ErrorKind::SchemaError, "axis must be x, y or z");
}

} // namespace

ImplicitSurface RunConfig::make_surface() const {
    if (surface.contains("preset")) return make_preset(surface.at("preset").get<std::string>(), cell.size);
    // {"name": "n14", "terms": [{"coefficient": 1, "factors": [["cos", "x", 1], ...]}, ...]}
    ImplicitSurface s;
    s.name = surface.value("name", std::string("custom"));
    s.period = cell.size;
    for (const auto& t : surface.at("terms")) {
        FourierTerm term;
        term.coefficient = t.at("coefficient").get<double>();
        for (const auto& f : t.at("factors")) {
            TrigFactor tf;
            const auto fn = f.at(0).get<std::string>();
            if (fn != "cos" && fn != "sin") throw Error(ErrorKind::SchemaError, "factor function must be cos or sin");
            tf.fn = fn == "cos" ? Trig::Cos : Trig::Sin;
            tf.axis = axis_index(f.at(1));
            if (tf.axis < 0 || tf.axis > 2) throw Error(ErrorKind::SchemaError, "axis index out of range");
            tf.multiple = f.at(2).get<int>();
            term.factors.push_back(tf);
        }
        s.terms.push_back(term);
    }
    if (s.terms.empty()) throw Error(ErrorKind::SchemaError, "custom surface has no terms");
    return s;
}

std::string RunConfig::surface_name() const {
    if (surface.contains("preset")) return surface.at("preset").get<std::string>();
    return surface.value("name", std::string("custom"));
}

OptimizerConfig RunConfig::optimizer() const {
    OptimizerConfig o;
    o.bounds = bounds();
    o.move_limit = move_limit;
    o.max_iterations = max_iterations;
    o.tolerance = tolerance;
    o.checkpoint_every = checkpoint_every;
    o.checkpoint_path = output / "checkpoint.json";
    return o;
}

void RunConfig::validate() const {
    cell.validate();
    material.validate();
    if (meshing.resolution < kMinResolution)
        throw Error(ErrorKind::InvalidArgument, "resolution must be at least " + std::to_string(kMinResolution));
    if (!(min_ratio > 0.0 && min_ratio <= initial_ratio && initial_ratio <= max_ratio))
        throw Error(ErrorKind::InvalidArgument, "thickness ratios must satisfy 0 < min <= initial <= max");
    optimizer().validate();
    if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "fit fraction must lie in (0, 1]");
    if (machine_stiffness < 0.0) throw Error(ErrorKind::InvalidArgument, "machine stiffness must be >= 0");
    make_surface(); // unknown presets and malformed terms surface here
}

RunConfig from_json(const json& j) {
    RunConfig c;
    try {
        only_keys(j, "config", {"surface", "cell", "mesh", "material", "thickness", "optimizer", "output", "specimen"});
        if (j.contains("surface")) {
            const auto& s = j.at("surface");
            only_keys(s, "surface", {"preset", "name", "terms"});
            if (s.contains("preset") == s.contains("terms"))
                throw Error(ErrorKind::SchemaError, "surface needs exactly one of 'preset' or 'terms'");
            c.surface = s;
        }
        if (j.contains("cell")) {
            const auto& s = j.at("cell");
            only_keys(s, "cell", {"size", "domain", "tiles"});
            read(s, "size", c.cell.size);
            if (s.contains("domain")) c.cell.domain = domain_from_string(s.at("domain").get<std::string>());
            read(s, "tiles", c.cell.tiles);
        }
        if (j.contains("mesh")) {
            const auto& s = j.at("mesh");
            only_keys(s, "mesh", {"resolution", "collapse_fraction", "sliver_angle"});
            read(s, "resolution", c.meshing.resolution);
            read(s, "collapse_fraction", c.meshing.collapse_fraction);
            read(s, "sliver_angle", c.meshing.sliver_angle);
        }
        if (j.contains("material")) {
            const auto& s = j.at("material");
            only_keys(s, "material", {"youngs", "poisson"});
            read(s, "youngs", c.material.youngs);
            read(s, "poisson", c.material.poisson);
        }
        if (j.contains("thickness")) {
            const auto& s = j.at("thickness");
            only_keys(s, "thickness", {"initial_ratio", "min_ratio", "max_ratio"});
            read(s, "initial_ratio", c.initial_ratio);
            read(s, "min_ratio", c.min_ratio);
            read(s, "max_ratio", c.max_ratio);
        }
        if (j.contains("optimizer")) {
            const auto& s = j.at("optimizer");
            only_keys(s, "optimizer", {"move_limit", "max_iterations", "tolerance", "checkpoint_every"});
            read(s, "move_limit", c.move_limit);
            read(s, "max_iterations", c.max_iterations);
            read(s, "tolerance", c.tolerance);
            read(s, "checkpoint_every", c.checkpoint_every);
        }
        if (j.contains("specimen")) {
            const auto& s = j.at("specimen");
            only_keys(s, "specimen", {"height", "area", "relative_density", "machine_stiffness", "fit_fraction"});
            read(s, "height", c.specimen_height);
            read(s, "area", c.specimen_area);
            read(s, "relative_density", c.specimen_density);
            read(s, "machine_stiffness", c.machine_stiffness);
            read(s, "fit_fraction", c.fit_fraction);
        }
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, std::string("config: ") + e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["surface"] = c.surface;
    j["cell"] = {{"size", c.cell.size}, {"domain", to_string(c.cell.domain)}, {"tiles", c.cell.tiles}};
    j["mesh"] = {{"resolution", c.meshing.resolution},
                 {"collapse_fraction", c.meshing.collapse_fraction},
                 {"sliver_angle", c.meshing.sliver_angle}};
    j["material"] = {{"youngs", c.material.youngs}, {"poisson", c.material.poisson}};
    j["thickness"] = {{"initial_ratio", c.initial_ratio}, {"min_ratio", c.min_ratio}, {"max_ratio", c.max_ratio}};
    j["optimizer"] = {{"move_limit", c.move_limit},
                      {"max_iterations", c.max_iterations},
                      {"tolerance", c.tolerance},
                      {"checkpoint_every", c.checkpoint_every}};
    j["specimen"] = {{"height", c.specimen_height},
                     {"area", c.specimen_area},
                     {"relative_density", c.specimen_density},
                     {"machine_stiffness", c.machine_stiffness},
                     {"fit_fraction", c.fit_fraction}};
    j["output"] = c.output.string();
    return j;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

RunConfig resolve(const Overrides& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : from_json(read_json(o.config_path));
    if (o.preset) c.surface = {{"preset", *o.preset}};
    if (o.size) c.cell.size = *o.size;
    if (o.domain) c.cell.domain = domain_from_string(*o.domain);
    if (!o.tiles.empty()) {
        c.cell.tiles = {o.tiles[0], o.tiles[1], o.tiles[2]};
        c.cell.domain = Domain::Tiled;
    }
    if (o.resolution) c.meshing.resolution = *o.resolution;
    if (o.youngs) c.material.youngs = *o.youngs;
    if (o.poisson) c.material.poisson = *o.poisson;
    if (o.initial_ratio) c.initial_ratio = *o.initial_ratio;
    if (o.min_ratio) c.min_ratio = *o.min_ratio;
    if (o.max_ratio) c.max_ratio = *o.max_ratio;
    if (o.tolerance) c.tolerance = *o.tolerance;
    if (o.move_limit) c.move_limit = *o.move_limit;
    if (o.max_iterations) c.max_iterations = *o.max_iterations;
    if (o.checkpoint_every) c.checkpoint_every = *o.checkpoint_every;
    if (o.output) c.output = *o.output;
    c.validate();
    return c;
}

void write_resolved(const RunConfig& c, const std::string& command) {
    std::filesystem::create_directories(c.output);
    write_json(c.output / (command + ".config.json"), to_json(c));
}

} // namespace isoshell::cli
