#include "picproj/mesh.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace picproj {

namespace {

// Yields whitespace-separated tokens of non-empty, comment-stripped lines.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

template <typename T>
T parse_number(const std::string& tok, int line) {
  std::istringstream ss(tok);
  T value{};
  ss >> value;
  if (ss.fail() || !ss.eof()) throw ParseError("malformed number '" + tok + "'", line);
  return value;
}

void expect_count(const std::vector<std::string>& tokens, std::size_t n, int line) {
  if (tokens.size() != n) {
    throw ParseError("expected " + std::to_string(n) + " fields, got " + std::to_string(tokens.size()), line);
  }
}

}  // namespace

SimplicialMesh read_mesh(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string> tok;
  if (!reader.next(tok) || tok.size() != 2 || tok[0] != "tri2d") throw ParseError("missing 'tri2d' header", reader.line());
  if (tok[1] != "1") throw ParseError("unsupported format version " + tok[1], reader.line());
  if (!reader.next(tok)) throw ParseError("missing vertex/cell counts", reader.line());
  expect_count(tok, 2, reader.line());
  const auto nv = parse_number<Index>(tok[0], reader.line());
  const auto nc = parse_number<Index>(tok[1], reader.line());
  if (nv < 3 || nc < 1) throw ParseError("mesh needs at least 3 vertices and 1 cell", reader.line());

  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (Index i = 0; i < nv; ++i) {
    if (!reader.next(tok)) throw ParseError("unexpected end of file in vertex block", reader.line());
    expect_count(tok, 2, reader.line());
    vertices.emplace_back(parse_number<double>(tok[0], reader.line()), parse_number<double>(tok[1], reader.line()));
  }
  std::vector<std::array<Index, 3>> cells;
  cells.reserve(static_cast<std::size_t>(nc));
  for (Index i = 0; i < nc; ++i) {
    if (!reader.next(tok)) throw ParseError("unexpected end of file in cell block", reader.line());
    expect_count(tok, 3, reader.line());
    std::array<Index, 3> cell{};
    for (int j = 0; j < 3; ++j) {
      cell[j] = parse_number<Index>(tok[j], reader.line());
      if (cell[j] < 0 || cell[j] >= nv) {
        throw ParseError("vertex index " + tok[j] + " out of range [0, " + std::to_string(nv) + ")", reader.line());
      }
    }
    cells.push_back(cell);
  }

  SimplicialMesh mesh = [&] {
    try {
      return SimplicialMesh(std::move(vertices), std::move(cells));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), reader.line());
    }
  }();

  std::map<std::pair<Index, Index>, Index> facet_of;
  for (Index f = 0; f < mesh.num_facets(); ++f) facet_of[{mesh.facet(f)[0], mesh.facet(f)[1]}] = f;
  auto find_facet = [&](const std::string& a, const std::string& b) {
    Index va = parse_number<Index>(a, reader.line());
    Index vb = parse_number<Index>(b, reader.line());
    if (va > vb) std::swap(va, vb);
    auto it = facet_of.find({va, vb});
    if (it == facet_of.end()) throw ParseError("(" + a + ", " + b + ") is not a mesh facet", reader.line());
    return it->second;
  };

  while (reader.next(tok)) {
    if (tok[0] == "markers") {
      expect_count(tok, 2, reader.line());
      const auto n = parse_number<Index>(tok[1], reader.line());
      for (Index i = 0; i < n; ++i) {
        if (!reader.next(tok)) throw ParseError("unexpected end of file in markers block", reader.line());
        expect_count(tok, 3, reader.line());
        const Index f = find_facet(tok[0], tok[1]);
        const int value = parse_number<int>(tok[2], reader.line());
        if (mesh.is_boundary(f)) {
          if (value < marker::kClosed || value > marker::kPeriodic) throw ParseError("invalid boundary marker", reader.line());
          mesh.set_boundary_marker(f, value);
        } else if (value != marker::kInterior) {
          throw ParseError("interior facet cannot carry a boundary marker", reader.line());
        }
      }
    } else if (tok[0] == "periodic") {
      expect_count(tok, 2, reader.line());
      const auto n = parse_number<Index>(tok[1], reader.line());
      for (Index i = 0; i < n; ++i) {
        if (!reader.next(tok)) throw ParseError("unexpected end of file in periodic block", reader.line());
        expect_count(tok, 4, reader.line());
        const Index f = find_facet(tok[0], tok[1]);
        const Index g = find_facet(tok[2], tok[3]);
        try {
          mesh.set_periodic_pair(f, g);
        } catch (const PairingFailure& e) {
          throw ParseError(e.what(), reader.line());
        }
      }
    } else {
      throw ParseError("unknown section '" + tok[0] + "'", reader.line());
    }
  }
  if (!mesh.has_periodic_pairing()) throw ParseError("periodic facet without partner", reader.line());
  return mesh;
}

SimplicialMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mesh file " + path);
  return read_mesh(in);
}

void write_mesh(const SimplicialMesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "tri2d 1\n" << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "markers " << mesh.num_facets() << '\n';
  Index pairs = 0;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    out << mesh.facet(f)[0] << ' ' << mesh.facet(f)[1] << ' ' << mesh.boundary_marker(f) << '\n';
    if (mesh.periodic_partner(f) > f) ++pairs;
  }
  if (pairs > 0) {
    out << "periodic " << pairs << '\n';
    for (Index f = 0; f < mesh.num_facets(); ++f) {
      const Index g = mesh.periodic_partner(f);
      if (g <= f) continue;
      out << mesh.facet(f)[0] << ' ' << mesh.facet(f)[1] << ' ' << mesh.facet(g)[0] << ' ' << mesh.facet(g)[1] << '\n';
    }
  }
}

void write_mesh(const SimplicialMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write mesh file " + path);
  write_mesh(mesh, out);
}

}  // namespace picproj
