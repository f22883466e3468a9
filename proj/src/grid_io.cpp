#include "voxnca/grid_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace voxnca {

using nlohmann::json;

void save_grid(const CellGrid& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    json header = {
        {"format", "voxnca-grid"},
        {"version", 1},
        {"dims", {g.nx, g.ny, g.nz}},
        {"variant", grid_variant_name(g.variant)},
        {"type_channels", g.type_channels},
        {"hidden_channels", g.hidden_channels},
    };
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(g.data.data()),
              std::streamsize(g.data.size() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

CellGrid load_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("missing grid header: " + path);
    json header = json::parse(line);
    if (header.value("format", "") != "voxnca-grid")
        throw std::runtime_error("not a grid file: " + path);
    auto dims = header.at("dims");
    GridVariant variant =
        header.at("variant").get<std::string>() == "dense" ? GridVariant::Dense : GridVariant::Conv;
    CellGrid g = CellGrid::zeros(dims.at(0), dims.at(1), dims.at(2), variant,
                                 header.at("type_channels"), header.at("hidden_channels"));
    in.read(reinterpret_cast<char*>(g.data.data()), std::streamsize(g.data.size() * sizeof(float)));
    if (size_t(in.gcount()) != g.data.size() * sizeof(float))
        throw std::runtime_error("truncated grid data: " + path);
    return g;
}

std::string layer_dump(const TypeField& f) {
    std::ostringstream os;
    for (int z = 0; z < f.nz; ++z) {
        if (f.nz > 1) os << "z=" << z << '\n';
        for (int y = 0; y < f.ny; ++y) {
            for (int x = 0; x < f.nx; ++x) os << voxel_type_char(f.at(x, y, z));
            os << '\n';
        }
        if (z + 1 < f.nz) os << '\n';
    }
    return os.str();
}

void save_voxel_list(const TypeField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "# dims " << f.nx << ' ' << f.ny << ' ' << f.nz << '\n';
    for (int z = 0; z < f.nz; ++z)
        for (int y = 0; y < f.ny; ++y)
            for (int x = 0; x < f.nx; ++x) {
                VoxelType t = f.at(x, y, z);
                if (t != VoxelType::Empty)
                    out << x << ' ' << y << ' ' << z << ' ' << int(t) << '\n';
            }
}

TypeField load_voxel_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    int nx = 0, ny = 0, nz = 0;
    struct Entry { int x, y, z, t; };
    std::vector<Entry> entries;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string first;
        if (!(is >> first)) continue;
        if (first == "#") {
            std::string word;
            if (is >> word && word == "dims") is >> nx >> ny >> nz;
            continue;
        }
        Entry e{};
        e.x = std::stoi(first);
        if (!(is >> e.y >> e.z >> e.t)) throw std::runtime_error("bad voxel line: " + line);
        entries.push_back(e);
    }
    for (const auto& e : entries) {
        nx = std::max(nx, e.x + 1);
        ny = std::max(ny, e.y + 1);
        nz = std::max(nz, e.z + 1);
    }
    if (nx == 0) throw std::runtime_error("voxel list has no content: " + path);
    TypeField f = TypeField::empty(nx, ny, nz);
    for (const auto& e : entries) {
        if (!f.in_bounds(e.x, e.y, e.z) || e.t < 0 || e.t >= kVoxelTypeCount)
            throw std::runtime_error("voxel entry out of range: " + path);
        f.set(e.x, e.y, e.z, static_cast<VoxelType>(e.t));
    }
    return f;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << contents;
}

}  // namespace voxnca
