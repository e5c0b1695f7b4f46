#include "anovox/io/ply.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace anovox {

namespace {

std::string format_float(float value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

enum class ScalarType { Float32, Float64, Uint8, Int8, Uint16, Int16, Uint32, Int32 };

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Float64:
      return 8;
    case ScalarType::Float32:
    case ScalarType::Uint32:
    case ScalarType::Int32:
      return 4;
    case ScalarType::Uint16:
    case ScalarType::Int16:
      return 2;
    default:
      return 1;
  }
}

ScalarType parse_scalar_type(const std::string& name, const std::filesystem::path& path) {
  if (name == "float" || name == "float32") return ScalarType::Float32;
  if (name == "double" || name == "float64") return ScalarType::Float64;
  if (name == "uchar" || name == "uint8") return ScalarType::Uint8;
  if (name == "char" || name == "int8") return ScalarType::Int8;
  if (name == "ushort" || name == "uint16") return ScalarType::Uint16;
  if (name == "short" || name == "int16") return ScalarType::Int16;
  if (name == "uint" || name == "uint32") return ScalarType::Uint32;
  if (name == "int" || name == "int32") return ScalarType::Int32;
  throw IoError("ply: unsupported scalar type '" + name + "' in " + path.string());
}

double read_binary_scalar(std::ifstream& in, ScalarType t) {
  char buf[8];
  in.read(buf, static_cast<std::streamsize>(scalar_size(t)));
  switch (t) {
    case ScalarType::Float32: {
      float v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case ScalarType::Float64: {
      double v;
      std::memcpy(&v, buf, 8);
      return v;
    }
    case ScalarType::Uint8:
      return static_cast<unsigned char>(buf[0]);
    case ScalarType::Int8:
      return static_cast<signed char>(buf[0]);
    case ScalarType::Uint16: {
      std::uint16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case ScalarType::Int16: {
      std::int16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case ScalarType::Uint32: {
      std::uint32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case ScalarType::Int32: {
      std::int32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
  }
  return 0.0;
}

struct Property {
  std::string name;
  bool is_list = false;
  ScalarType count_type = ScalarType::Uint8;
  ScalarType value_type = ScalarType::Float32;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

}  // namespace

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh,
               const PlyWriteOptions& options) {
  mesh.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("ply: cannot open " + path.string() + " for writing");

  const bool labeled = mesh.has_labels();
  out << "ply\n";
  out << (options.binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (labeled) out << "property ushort label\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar uint vertex_indices\n";
  out << "end_header\n";

  if (options.binary) {
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const float xyz[3] = {static_cast<float>(mesh.vertices[v].x()),
                            static_cast<float>(mesh.vertices[v].y()),
                            static_cast<float>(mesh.vertices[v].z())};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      if (labeled) {
        out.write(reinterpret_cast<const char*>(&mesh.labels[v]), sizeof(std::uint16_t));
      }
    }
    for (const auto& tri : mesh.triangles) {
      const std::uint8_t n = 3;
      out.write(reinterpret_cast<const char*>(&n), 1);
      out.write(reinterpret_cast<const char*>(tri.data()), sizeof(std::uint32_t) * 3);
    }
  } else {
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      out << format_float(static_cast<float>(mesh.vertices[v].x())) << " "
          << format_float(static_cast<float>(mesh.vertices[v].y())) << " "
          << format_float(static_cast<float>(mesh.vertices[v].z()));
      if (labeled) out << " " << mesh.labels[v];
      out << "\n";
    }
    for (const auto& tri : mesh.triangles) {
      out << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
    }
  }
  if (!out) throw IoError("ply: write failed for " + path.string());
}

TriangleMesh read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("ply: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
    throw IoError("ply: missing magic in " + path.string());
  }

  bool binary = false;
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    if (token == "comment" || token == "obj_info" || token.empty()) continue;
    if (token == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt == "ascii") {
        binary = false;
      } else {
        throw IoError("ply: unsupported format '" + fmt + "' in " + path.string());
      }
    } else if (token == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (token == "property") {
      if (elements.empty()) throw IoError("ply: property before element in " + path.string());
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, value_type;
        ls >> count_type >> value_type >> p.name;
        p.is_list = true;
        p.count_type = parse_scalar_type(count_type, path);
        p.value_type = parse_scalar_type(value_type, path);
      } else {
        ls >> p.name;
        p.value_type = parse_scalar_type(type, path);
      }
      elements.back().properties.push_back(p);
    } else if (token == "end_header") {
      break;
    } else {
      throw IoError("ply: unexpected header token '" + token + "' in " + path.string());
    }
  }

  TriangleMesh mesh;
  for (const Element& element : elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    int ix = -1, iy = -1, iz = -1, ilabel = -1, iface = -1;
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      const auto& prop = element.properties[p];
      if (prop.name == "x") ix = static_cast<int>(p);
      if (prop.name == "y") iy = static_cast<int>(p);
      if (prop.name == "z") iz = static_cast<int>(p);
      if (prop.name == "label") ilabel = static_cast<int>(p);
      if (prop.is_list && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
        iface = static_cast<int>(p);
      }
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      throw IoError("ply: vertex element without x/y/z in " + path.string());
    }
    if (is_vertex) {
      mesh.vertices.reserve(element.count);
      if (ilabel >= 0) mesh.labels.reserve(element.count);
    }

    std::vector<double> scalars(element.properties.size());
    std::vector<double> list_values;
    for (std::size_t row = 0; row < element.count; ++row) {
      list_values.clear();
      if (binary) {
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const auto& prop = element.properties[p];
          if (prop.is_list) {
            const std::size_t n =
                static_cast<std::size_t>(read_binary_scalar(in, prop.count_type));
            for (std::size_t k = 0; k < n; ++k) {
              const double v = read_binary_scalar(in, prop.value_type);
              if (static_cast<int>(p) == iface) list_values.push_back(v);
            }
          } else {
            scalars[p] = read_binary_scalar(in, prop.value_type);
          }
        }
      } else {
        std::string data_line;
        do {
          if (!std::getline(in, data_line)) throw IoError("ply: truncated " + path.string());
        } while (data_line.empty());
        std::istringstream ls(data_line);
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const auto& prop = element.properties[p];
          if (prop.is_list) {
            std::size_t n;
            ls >> n;
            for (std::size_t k = 0; k < n; ++k) {
              double v;
              ls >> v;
              if (static_cast<int>(p) == iface) list_values.push_back(v);
            }
          } else {
            ls >> scalars[p];
          }
        }
        if (!ls && is_vertex) throw IoError("ply: malformed vertex row in " + path.string());
      }
      if (!in) throw IoError("ply: truncated payload in " + path.string());

      if (is_vertex) {
        mesh.vertices.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
        if (ilabel >= 0) mesh.labels.push_back(static_cast<std::uint16_t>(scalars[ilabel]));
      } else if (is_face && iface >= 0) {
        if (list_values.size() != 3) {
          throw IoError("ply: non-triangular face in " + path.string());
        }
        mesh.triangles.push_back({static_cast<std::uint32_t>(list_values[0]),
                                  static_cast<std::uint32_t>(list_values[1]),
                                  static_cast<std::uint32_t>(list_values[2])});
      }
    }
  }

  mesh.validate();
  mesh.remove_degenerate_triangles();
  return mesh;
}

}  // namespace anovox
