#include "isoshell/mesh_io.hpp"

#include "isoshell/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace isoshell {

namespace {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "STL records are little-endian");

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t offset, const std::string& what) {
    throw Error(ErrorKind::MalformedFile, path.string() + " at byte " + std::to_string(offset) + ": " + what);
}

// Merges corners with bit-identical float coordinates, numbering in first-use order.
class CornerWelder {
public:
    int add(const std::array<float, 3>& p) {
        auto [it, fresh] = index_.try_emplace(p, static_cast<int>(vertices_.size()));
        if (fresh) vertices_.emplace_back(p[0], p[1], p[2]);
        return it->second;
    }
    std::vector<Vec3> take() { return std::move(vertices_); }

private:
    std::map<std::array<float, 3>, int> index_;
    std::vector<Vec3> vertices_;
};

TriMesh finish(CornerWelder& welder, std::vector<Tri> tris) {
    TriMesh m;
    m.vertices = welder.take();
    m.triangles = std::move(tris);
    if (!m.vertices.empty()) {
        m.box_min = m.box_max = m.vertices.front();
        for (const auto& v : m.vertices) {
            m.box_min = m.box_min.cwiseMin(v);
            m.box_max = m.box_max.cwiseMax(v);
        }
    }
    return m;
}

TriMesh parse_binary(const std::string& data, const std::filesystem::path& path) {
    std::uint32_t count = 0;
    std::memcpy(&count, data.data() + 80, 4);
    CornerWelder welder;
    std::vector<Tri> tris;
    tris.reserve(count);
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::size_t off = 84 + 50 * static_cast<std::size_t>(r);
        if (off + 50 > data.size()) malformed(path, off, "truncated facet record " + std::to_string(r));
        float f[12];
        std::memcpy(f, data.data() + off, sizeof f);
        Tri tri;
        for (int k = 0; k < 3; ++k) {
            const std::array<float, 3> p{f[3 + 3 * k], f[4 + 3 * k], f[5 + 3 * k]};
            for (float c : p)
                if (!std::isfinite(c)) malformed(path, off + 12 + 12 * k, "non-finite coordinate");
            tri[k] = welder.add(p);
        }
        tris.push_back(tri);
    }
    if (data.size() != 84 + 50 * static_cast<std::size_t>(count))
        malformed(path, 84 + 50 * static_cast<std::size_t>(count), "trailing bytes after the last facet");
    return finish(welder, std::move(tris));
}

class AsciiReader {
public:
    AsciiReader(const std::string& data, const std::filesystem::path& path) : data_(data), path_(path) {}

    TriMesh parse() {
        expect("solid");
        skip_line();
        CornerWelder welder;
        std::vector<Tri> tris;
        for (;;) {
            const std::string word = token();
            if (word == "endsolid") break;
            if (word != "facet") malformed(path_, start_, "expected 'facet' or 'endsolid', found '" + word + "'");
            expect("normal");
            for (int k = 0; k < 3; ++k) number();
            expect("outer");
            expect("loop");
            Tri tri;
            for (int k = 0; k < 3; ++k) {
                expect("vertex");
                std::array<float, 3> p{};
                for (float& c : p) c = static_cast<float>(number());
                tri[k] = welder.add(p);
            }
            expect("endloop");
            expect("endfacet");
            tris.push_back(tri);
        }
        return finish(welder, std::move(tris));
    }

private:
    void skip_space() {
        while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    }
    void skip_line() {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
    }
    std::string token() {
        skip_space();
        start_ = pos_;
        if (pos_ >= data_.size()) malformed(path_, pos_, "unexpected end of file");
        while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
        return data_.substr(start_, pos_ - start_);
    }
    void expect(const char* word) {
        const std::string t = token();
        if (t != word) malformed(path_, start_, std::string("expected '") + word + "', found '" + t + "'");
    }
    double number() {
        const std::string t = token();
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size() || !std::isfinite(v)) malformed(path_, start_, "bad number '" + t + "'");
        return v;
    }

    const std::string& data_;
    const std::filesystem::path& path_;
    std::size_t pos_ = 0, start_ = 0;
};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

} // namespace

void save_stl(std::span<const Vec3> vertices, std::span<const Tri> triangles, const std::filesystem::path& path,
              StlFormat format, const std::string& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    auto normal = [&](const Tri& t) -> Vec3 {
        const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
        const double len = n.norm();
        return len > 0 ? Vec3(n / len) : Vec3::Zero();
    };
    if (format == StlFormat::Binary) {
        char head[80] = {};
        std::memcpy(head, header.data(), std::min<std::size_t>(header.size(), 80));
        out.write(head, 80);
        const auto count = static_cast<std::uint32_t>(triangles.size());
        out.write(reinterpret_cast<const char*>(&count), 4);
        for (const auto& t : triangles) {
            float rec[12];
            const Vec3 n = normal(t);
            for (int a = 0; a < 3; ++a) rec[a] = static_cast<float>(n[a]);
            for (int k = 0; k < 3; ++k)
                for (int a = 0; a < 3; ++a) rec[3 + 3 * k + a] = static_cast<float>(vertices[t[k]][a]);
            out.write(reinterpret_cast<const char*>(rec), sizeof rec);
            const std::uint16_t attr = 0;
            out.write(reinterpret_cast<const char*>(&attr), 2);
        }
    } else {
        out << "solid " << header << "\n";
        out.precision(9); // round-trips float32
        for (const auto& t : triangles) {
            const Vec3 n = normal(t);
            out << "  facet normal " << n.x() << ' ' << n.y() << ' ' << n.z() << "\n    outer loop\n";
            for (int k = 0; k < 3; ++k) {
                const Vec3& v = vertices[t[k]];
                out << "      vertex " << static_cast<float>(v.x()) << ' ' << static_cast<float>(v.y()) << ' '
                    << static_cast<float>(v.z()) << "\n";
            }
            out << "    endloop\n  endfacet\n";
        }
        out << "endsolid " << header << "\n";
    }
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void save_stl(const TriMesh& mesh, const std::filesystem::path& path, StlFormat format) {
    save_stl(mesh.vertices, mesh.triangles, path, format);
}

TriMesh load_stl(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() >= 84) {
        std::uint32_t count = 0;
        std::memcpy(&count, data.data() + 80, 4);
        if (data.size() == 84 + 50 * static_cast<std::size_t>(count)) return parse_binary(data, path);
    }
    if (data.rfind("solid", 0) == 0) return AsciiReader(data, path).parse();
    if (data.size() < 84) malformed(path, data.size(), "file shorter than the 84-byte binary header");
    return parse_binary(data, path);
}

void save_sidecar(const TriMesh& mesh, const std::filesystem::path& path) {
    json j;
    j["vertex_count"] = mesh.num_vertices();
    j["triangle_count"] = mesh.num_triangles();
    j["cell"] = {{"size_mm", mesh.cell.size}, {"domain", to_string(mesh.cell.domain)}, {"tiles", mesh.cell.tiles}};
    j["box_min"] = vec_json(mesh.box_min);
    j["box_max"] = vec_json(mesh.box_max);
    json planes = json::array();
    for (const auto& p : mesh.planes) planes.push_back({{"name", p.name}, {"normal", vec_json(p.normal)}, {"offset", p.offset}});
    j["planes"] = planes;
    j["plane_tags"] = mesh.plane_tags;
    json dm = json::array();
    for (const auto& d : mesh.domain_map) dm.push_back({d.source, d.copy});
    j["domain_map"] = dm;
    j["source_element"] = mesh.source_element;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(1) << "\n";
}

void apply_sidecar(TriMesh& mesh, const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
        if (j.at("vertex_count").get<std::size_t>() != mesh.num_vertices() ||
            j.at("triangle_count").get<std::size_t>() != mesh.num_triangles())
            throw Error(ErrorKind::MalformedFile, path.string() + ": sidecar does not match the STL's vertex/triangle counts");
        const json& c = j.at("cell");
        mesh.cell.size = c.at("size_mm").get<double>();
        mesh.cell.domain = domain_from_string(c.at("domain").get<std::string>());
        mesh.cell.tiles = c.at("tiles").get<std::array<int, 3>>();
        mesh.box_min = vec_from(j.at("box_min"));
        mesh.box_max = vec_from(j.at("box_max"));
        mesh.planes.clear();
        for (const auto& p : j.at("planes"))
            mesh.planes.push_back({p.at("name").get<std::string>(), vec_from(p.at("normal")), p.at("offset").get<double>()});
        mesh.plane_tags = j.at("plane_tags").get<std::vector<std::uint32_t>>();
        mesh.domain_map.clear();
        for (const auto& d : j.at("domain_map")) mesh.domain_map.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
        mesh.source_element = j.at("source_element").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedFile, path.string() + ": " + e.what());
    }
    auto sized = [&](std::size_t n, std::size_t want) { return n == 0 || n == want; };
    if (!sized(mesh.plane_tags.size(), mesh.num_vertices()) || !sized(mesh.domain_map.size(), mesh.num_triangles()) ||
        !sized(mesh.source_element.size(), mesh.num_triangles()))
        throw Error(ErrorKind::MalformedFile, path.string() + ": per-vertex or per-triangle arrays have the wrong length");
}

std::filesystem::path sidecar_path(const std::filesystem::path& stl) {
    std::filesystem::path p = stl;
    p.replace_extension(".mesh.json");
    return p;
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& stl, StlFormat format) {
    TriMesh m = mesh;
    compact_vertices(m);
    save_stl(m, stl, format);
    save_sidecar(m, sidecar_path(stl));
}

TriMesh load_mesh(const std::filesystem::path& stl) {
    TriMesh m = load_stl(stl);
    if (std::filesystem::exists(sidecar_path(stl))) apply_sidecar(m, sidecar_path(stl));
    return m;
}

} // namespace isoshell
