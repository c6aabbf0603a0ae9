#include "raylign/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "raylign/errors.hpp"

namespace raylign::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

void atomic_write(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void finalize_normals(PointCloud& cloud, std::vector<Eigen::Vector3d>& normals,
                      std::size_t with_normals) {
  if (with_normals == 0) return;
  if (with_normals != cloud.points.size())
    throw IoError("some rows have normals and some do not");
  cloud.normals = std::move(normals);
  for (auto& n : cloud.normals) {
    const double len = n.norm();
    if (len <= 0.0) throw IoError("zero-length normal in file");
    n /= len;
  }
}

}  // namespace

PointCloud read_point_cloud(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".xyz" || ext == ".txt") return read_xyz(path);
  if (ext == ".ply") return read_ply(path);
  throw IoError("unsupported point cloud extension: " + path.string());
}

void write_point_cloud(const fs::path& path, const PointCloud& cloud) {
  const std::string ext = lower_extension(path);
  if (ext == ".xyz" || ext == ".txt") return write_xyz(path, cloud);
  if (ext == ".ply") return write_ply(path, cloud);
  throw IoError("unsupported point cloud extension: " + path.string());
}

PointCloud read_xyz(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());

  PointCloud cloud;
  std::vector<Eigen::Vector3d> normals;
  std::size_t with_normals = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z))
      throw IoError("malformed xyz line in " + path.string());
    cloud.points.emplace_back(x, y, z);
    double nx, ny, nz;
    if (ss >> nx >> ny >> nz) {
      normals.emplace_back(nx, ny, nz);
      ++with_normals;
    }
  }
  if (cloud.points.empty()) throw IoError("no points in " + path.string());
  finalize_normals(cloud, normals, with_normals);
  return cloud;
}

void write_xyz(const fs::path& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 48);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    if (cloud.has_normals()) {
      const auto& n = cloud.normals[i];
      out += ' ';
      out += format_double(n.x());
      out += ' ';
      out += format_double(n.y());
      out += ' ';
      out += format_double(n.z());
    }
    out += '\n';
  }
  atomic_write(path, out);
}

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t scalar_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8")
    return 1;
  if (type == "short" || type == "ushort" || type == "int16" ||
      type == "uint16")
    return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64" || type == "int64" ||
      type == "uint64")
    return 8;
  throw IoError("unknown ply scalar type: " + type);
}

double read_binary_scalar(std::istream& in, const std::string& type) {
  unsigned char buf[8];
  const std::size_t n = scalar_size(type);
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (!in) throw IoError("unexpected end of binary ply data");
  if (type == "float" || type == "float32") {
    float f;
    std::memcpy(&f, buf, 4);
    return f;
  }
  if (type == "double" || type == "float64") {
    double d;
    std::memcpy(&d, buf, 8);
    return d;
  }
  // Integer types, little-endian.
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < n; ++i)
    u |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  const bool is_signed = type[0] == 'c' || type[0] == 's' ||
                         (type[0] == 'i' && type != "uint");
  if (is_signed) {
    const std::uint64_t sign_bit = 1ULL << (8 * n - 1);
    if (u & sign_bit) return static_cast<double>(static_cast<std::int64_t>(
        u | ~((sign_bit << 1) - 1)));
  }
  return static_cast<double>(u);
}

}  // namespace

PointCloud read_ply(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw IoError("not a ply file: " + path.string());

  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else throw IoError("unsupported ply format: " + fmt);
    } else if (word == "element") {
      PlyElement e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw IoError("ply property before element");
      PlyProperty p;
      ss >> p.type;
      if (p.type == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
      } else {
        ss >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }

  PointCloud cloud;
  std::vector<Eigen::Vector3d> normals;
  std::size_t with_normals = 0;

  for (const auto& element : elements) {
    const bool is_vertex = element.name == "vertex";
    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      const auto& name = element.properties[p].name;
      if (name == "x") ix = static_cast<int>(p);
      else if (name == "y") iy = static_cast<int>(p);
      else if (name == "z") iz = static_cast<int>(p);
      else if (name == "nx") inx = static_cast<int>(p);
      else if (name == "ny") iny = static_cast<int>(p);
      else if (name == "nz") inz = static_cast<int>(p);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
      throw IoError("ply vertex element lacks x/y/z");

    std::vector<double> row(element.properties.size());
    for (std::size_t i = 0; i < element.count; ++i) {
      if (binary) {
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const auto& prop = element.properties[p];
          if (prop.is_list) {
            const double count = read_binary_scalar(in, prop.count_type);
            for (std::size_t j = 0; j < static_cast<std::size_t>(count); ++j)
              read_binary_scalar(in, prop.type);
            row[p] = 0.0;
          } else {
            row[p] = read_binary_scalar(in, prop.type);
          }
        }
      } else {
        if (!std::getline(in, line))
          throw IoError("unexpected end of ascii ply data");
        std::istringstream ss(line);
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const auto& prop = element.properties[p];
          if (prop.is_list) {
            std::size_t count = 0;
            if (!(ss >> count)) throw IoError("malformed ply list row");
            double skip;
            for (std::size_t j = 0; j < count; ++j) ss >> skip;
            row[p] = 0.0;
          } else if (!(ss >> row[p])) {
            throw IoError("malformed ply row in " + path.string());
          }
        }
      }
      if (is_vertex) {
        cloud.points.emplace_back(row[ix], row[iy], row[iz]);
        if (inx >= 0 && iny >= 0 && inz >= 0) {
          normals.emplace_back(row[inx], row[iny], row[inz]);
          ++with_normals;
        }
      }
    }
  }

  if (cloud.points.empty()) throw IoError("no vertices in " + path.string());
  finalize_normals(cloud, normals, with_normals);
  return cloud;
}

void write_ply(const fs::path& path, const PointCloud& cloud) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals())
    out += "property double nx\nproperty double ny\nproperty double nz\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    if (cloud.has_normals()) {
      const auto& n = cloud.normals[i];
      out += ' ';
      out += format_double(n.x());
      out += ' ';
      out += format_double(n.y());
      out += ' ';
      out += format_double(n.z());
    }
    out += '\n';
  }
  atomic_write(path, out);
}

RigidTransform read_transform(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(in >> m(r, c)))
        throw IoError("malformed transform file: " + path.string());
  try {
    return RigidTransform::from_matrix(m);
  } catch (const Error& e) {
    throw IoError(std::string(e.what()) + " in " + path.string());
  }
}

void write_transform(const fs::path& path, const RigidTransform& t) {
  const Eigen::Matrix4d m = t.matrix();
  std::string out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out += format_double(m(r, c));
      out += c == 3 ? '\n' : ' ';
    }
  }
  atomic_write(path, out);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t begin = 0;
    for (;;) {
      const std::size_t comma = line.find(',', begin);
      fields.push_back(line.substr(begin, comma - begin));
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      out += i + 1 == row.size() ? '\n' : ',';
    }
  };
  append_row(header);
  for (const auto& row : rows) append_row(row);
  atomic_write(path, out);
}

}  // namespace raylign::io
