#include <fstream>
#include <iomanip>
#include <sstream>

#include "fepic/mesh.hpp"

namespace fepic {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty line with comments stripped.
  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    fail(std::string("unexpected end of file, expected ") + what);
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, "mesh line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::size_t read_section(LineReader& lr, const std::string& name) {
  auto ls = lr.next(name.c_str());
  std::string key;
  long count = -1;
  ls >> key >> count;
  if (key != name || count < 0) lr.fail("expected '" + name + " <count>'");
  return static_cast<std::size_t>(count);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  LineReader lr(in);
  {
    auto ls = lr.next("header");
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != "fepic-mesh" || version != 1) lr.fail("expected header 'fepic-mesh 1'");
  }

  double unit = 1.0;
  auto ls = lr.next("nodes");
  std::string key;
  ls >> key;
  if (key == "length_unit") {
    if (!(ls >> unit) || !(unit > 0.0)) lr.fail("bad length_unit");
    ls = lr.next("nodes");
    ls >> key;
  }
  long n_nodes = -1;
  ls >> n_nodes;
  if (key != "nodes" || n_nodes < 0) lr.fail("expected 'nodes <count>'");

  std::vector<Vec3> nodes(n_nodes);
  for (auto& p : nodes) {
    auto l = lr.next("node coordinates");
    if (!(l >> p.x >> p.y >> p.z)) lr.fail("bad node coordinates");
    p *= unit;
  }

  const std::size_t n_tets = read_section(lr, "tets");
  std::vector<Tet> tets(n_tets);
  std::vector<Region> regions(n_tets, Region::Vacuum);
  for (std::size_t i = 0; i < n_tets; ++i) {
    auto l = lr.next("tet");
    auto& t = tets[i];
    if (!(l >> t[0] >> t[1] >> t[2] >> t[3])) lr.fail("bad tet indices");
    int region = 0;
    if (l >> region) {
      if (region != 1 && region != 2) lr.fail("region must be 1 (vacuum) or 2 (metal)");
      regions[i] = static_cast<Region>(region);
    }
  }

  const std::size_t n_faces = read_section(lr, "faces");
  std::vector<FaceSpec> faces(n_faces);
  for (auto& f : faces) {
    auto l = lr.next("face");
    int tag = 0;
    if (!(l >> f.nodes[0] >> f.nodes[1] >> f.nodes[2] >> tag)) lr.fail("bad face record");
    if (tag < 1 || tag > kBoundaryTagCount) lr.fail("face tag must be in 1..5");
    f.tag = static_cast<BoundaryTag>(tag);
  }
  return Mesh(std::move(nodes), std::move(tets), std::move(regions), faces);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const auto old_prec = out.precision(17);
  out << "fepic-mesh 1\n";
  out << "nodes " << mesh.num_nodes() << '\n';
  for (const auto& p : mesh.nodes()) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  out << "tets " << mesh.num_cells() << '\n';
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const auto& t = mesh.cell(c);
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << ' ' << static_cast<int>(mesh.region(c)) << '\n';
  }
  out << "faces " << mesh.num_faces() << '\n';
  for (const auto& f : mesh.faces()) {
    out << f.nodes[0] << ' ' << f.nodes[1] << ' ' << f.nodes[2] << ' ' << static_cast<int>(f.tag) << '\n';
  }
  out.precision(old_prec);
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write mesh file " + path);
  write_mesh(out, mesh);
}

}  // namespace fepic
