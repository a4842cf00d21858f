// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/ply_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cloudgauge/error.hpp"

namespace cloudgauge {

namespace {

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<ScalarType> parse_scalar_type(std::string_view name) {
  if (name == "char" || name == "int8") return ScalarType::kInt8;
  if (name == "uchar" || name == "uint8") return ScalarType::kUInt8;
  if (name == "short" || name == "int16") return ScalarType::kInt16;
  if (name == "ushort" || name == "uint16") return ScalarType::kUInt16;
  if (name == "int" || name == "int32") return ScalarType::kInt32;
  if (name == "uint" || name == "uint32") return ScalarType::kUInt32;
  if (name == "float" || name == "float32") return ScalarType::kFloat32;
  if (name == "double" || name == "float64") return ScalarType::kFloat64;
  return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8:
      return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16:
      return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32:
      return 4;
    case ScalarType::kFloat64:
      return 8;
  }
  return 0;
}

bool is_real(ScalarType t) { return t == ScalarType::kFloat32 || t == ScalarType::kFloat64; }

struct Property {
  std::string name;
  ScalarType type = ScalarType::kFloat32;
  bool is_list = false;
  ScalarType count_type = ScalarType::kUInt8;
  std::size_t line = 0;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  PlyFormat format = PlyFormat::kAscii;
  std::vector<Element> elements;
  std::size_t body_offset = 0;
  std::size_t body_line = 0;
  std::optional<int> precision;
};

// Role of a vertex property in the cloud.
enum class Slot { kSkip, kX, kY, kZ, kRed, kGreen, kBlue, kNx, kNy, kNz };

Slot slot_of(std::string_view name) {
  if (name == "x") return Slot::kX;
  if (name == "y") return Slot::kY;
  if (name == "z") return Slot::kZ;
  if (name == "red") return Slot::kRed;
  if (name == "green") return Slot::kGreen;
  if (name == "blue") return Slot::kBlue;
  if (name == "nx") return Slot::kNx;
  if (name == "ny") return Slot::kNy;
  if (name == "nz") return Slot::kNz;
  return Slot::kSkip;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail_line(std::string_view source, std::size_t line, const std::string& what) {
  throw DataError(std::string(source) + ": line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_byte(std::string_view source, std::size_t offset, const std::string& what) {
  throw DataError(std::string(source) + ": byte " + std::to_string(offset) + ": " + what);
}

Header parse_header(std::string_view bytes, std::string_view source) {
  Header header;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  bool done = false;

  auto next_line = [&]() -> std::string_view {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) {
      fail_line(source, line_no + 1, "unexpected end of header (missing end_header)");
    }
    std::string_view line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    return line;
  };

  if (next_line() != "ply") fail_line(source, 1, "missing 'ply' magic");

  while (!done) {
    const std::string_view line = next_line();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") {
      if (tok.size() == 3 && tok[0] == "comment" && tok[1] == "precision") {
        int pr = 0;
        const auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), pr);
        if (ec == std::errc() && p == tok[2].data() + tok[2].size()) header.precision = pr;
      }
      continue;
    }
    if (tok[0] == "format") {
      if (tok.size() != 3) fail_line(source, line_no, "malformed format line");
      if (tok[1] == "ascii") {
        header.format = PlyFormat::kAscii;
      } else if (tok[1] == "binary_little_endian") {
        header.format = PlyFormat::kBinaryLittleEndian;
      } else if (tok[1] == "binary_big_endian") {
        fail_line(source, line_no, "unsupported format binary_big_endian");
      } else {
        fail_line(source, line_no, "unknown format '" + std::string(tok[1]) + "'");
      }
      if (tok[2] != "1.0") fail_line(source, line_no, "unsupported PLY version");
      saw_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) fail_line(source, line_no, "malformed element line");
      Element e;
      e.name = std::string(tok[1]);
      const auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
      if (ec != std::errc() || p != tok[2].data() + tok[2].size()) {
        fail_line(source, line_no, "invalid element count '" + std::string(tok[2]) + "'");
      }
      header.elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (header.elements.empty()) fail_line(source, line_no, "property before any element");
      Property prop;
      prop.line = line_no;
      if (tok.size() == 5 && tok[1] == "list") {
        const auto ct = parse_scalar_type(tok[2]);
        const auto it = parse_scalar_type(tok[3]);
        if (!ct || !it) fail_line(source, line_no, "unknown list property type");
        if (is_real(*ct)) fail_line(source, line_no, "list count type must be integral");
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *it;
        prop.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        const auto t = parse_scalar_type(tok[1]);
        if (!t) fail_line(source, line_no, "unknown property type '" + std::string(tok[1]) + "'");
        prop.type = *t;
        prop.name = std::string(tok[2]);
      } else {
        fail_line(source, line_no, "malformed property line");
      }
      header.elements.back().properties.push_back(std::move(prop));
    } else if (tok[0] == "end_header") {
      done = true;
    } else {
      fail_line(source, line_no, "unexpected header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_format) fail_line(source, line_no, "header has no format line");
  header.body_offset = pos;
  header.body_line = line_no;
  return header;
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

double load_scalar(const char* p, ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
      return load_le<std::int8_t>(p);
    case ScalarType::kUInt8:
      return load_le<std::uint8_t>(p);
    case ScalarType::kInt16:
      return load_le<std::int16_t>(p);
    case ScalarType::kUInt16:
      return load_le<std::uint16_t>(p);
    case ScalarType::kInt32:
      return load_le<std::int32_t>(p);
    case ScalarType::kUInt32:
      return load_le<std::uint32_t>(p);
    case ScalarType::kFloat32:
      return load_le<float>(p);
    case ScalarType::kFloat64:
      return load_le<double>(p);
  }
  return 0.0;
}

struct VertexLayout {
  std::vector<Slot> slots;
  bool has_xyz = false;
  bool has_color = false;
  bool has_normal = false;
};

VertexLayout check_vertex_layout(const Element& vertex, std::string_view source) {
  VertexLayout layout;
  std::array<int, 10> seen{};
  for (const auto& prop : vertex.properties) {
    const Slot s = prop.is_list ? Slot::kSkip : slot_of(prop.name);
    const std::string where = std::string(source) + ": line " + std::to_string(prop.line) +
                              ": vertex property '" + prop.name + "'";
    switch (s) {
      case Slot::kX:
      case Slot::kY:
      case Slot::kZ:
      case Slot::kNx:
      case Slot::kNy:
      case Slot::kNz:
        if (!is_real(prop.type)) throw DataError(where + " must be float or double");
        break;
      case Slot::kRed:
      case Slot::kGreen:
      case Slot::kBlue:
        if (prop.type != ScalarType::kUInt8) throw DataError(where + " must be uchar");
        break;
      case Slot::kSkip:
        std::clog << "warning: " << source << ": skipping vertex property '" << prop.name
                  << "'\n";
        break;
    }
    ++seen[static_cast<int>(s)];
    layout.slots.push_back(s);
  }
  auto all = [&](Slot a, Slot b, Slot c) {
    return seen[static_cast<int>(a)] == 1 && seen[static_cast<int>(b)] == 1 &&
           seen[static_cast<int>(c)] == 1;
  };
  auto none = [&](Slot a, Slot b, Slot c) {
    return seen[static_cast<int>(a)] == 0 && seen[static_cast<int>(b)] == 0 &&
           seen[static_cast<int>(c)] == 0;
  };
  layout.has_xyz = all(Slot::kX, Slot::kY, Slot::kZ);
  if (!layout.has_xyz) throw DataError(std::string(source) + ": vertex element lacks x,y,z");
  layout.has_color = all(Slot::kRed, Slot::kGreen, Slot::kBlue);
  if (!layout.has_color && !none(Slot::kRed, Slot::kGreen, Slot::kBlue)) {
    throw DataError(std::string(source) + ": incomplete red,green,blue properties");
  }
  layout.has_normal = all(Slot::kNx, Slot::kNy, Slot::kNz);
  if (!layout.has_normal && !none(Slot::kNx, Slot::kNy, Slot::kNz)) {
    throw DataError(std::string(source) + ": incomplete nx,ny,nz properties");
  }
  return layout;
}

struct VertexSink {
  Points points;
  Colors colors;
  Normals normals;

  void store(Eigen::Index i, Slot s, double v) {
    switch (s) {
      case Slot::kX:
        points(0, i) = v;
        break;
      case Slot::kY:
        points(1, i) = v;
        break;
      case Slot::kZ:
        points(2, i) = v;
        break;
      case Slot::kRed:
        colors(0, i) = static_cast<std::uint8_t>(v);
        break;
      case Slot::kGreen:
        colors(1, i) = static_cast<std::uint8_t>(v);
        break;
      case Slot::kBlue:
        colors(2, i) = static_cast<std::uint8_t>(v);
        break;
      case Slot::kNx:
        normals(0, i) = v;
        break;
      case Slot::kNy:
        normals(1, i) = v;
        break;
      case Slot::kNz:
        normals(2, i) = v;
        break;
      case Slot::kSkip:
        break;
    }
  }
};

class AsciiReader {
 public:
  AsciiReader(std::string_view bytes, std::size_t offset, std::size_t line, std::string_view source)
      : bytes_(bytes), pos_(offset), line_(line), source_(source) {}

  // Starts the next record; PLY ascii bodies have one record per line.
  void next_record() {
    if (pos_ >= bytes_.size()) fail_line(source_, line_ + 1, "truncated body: missing record");
    const std::size_t eol = bytes_.find('\n', pos_);
    const std::size_t end = eol == std::string_view::npos ? bytes_.size() : eol;
    tokens_ = split_ws(bytes_.substr(pos_, end - pos_));
    next_token_ = 0;
    pos_ = end + 1;
    ++line_;
    if (tokens_.empty()) next_record();
  }

  double number(ScalarType type) {
    if (next_token_ >= tokens_.size()) fail_line(source_, line_, "truncated record");
    const std::string_view tok = tokens_[next_token_++];
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (is_real(type)) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) bad_token(tok);
      return v;
    }
    long long v = 0;
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) bad_token(tok);
    if (type == ScalarType::kUInt8 && (v < 0 || v > 255)) {
      fail_line(source_, line_, "value " + std::string(tok) + " out of range for uchar");
    }
    return static_cast<double>(v);
  }

  void end_record() {
    if (next_token_ != tokens_.size()) fail_line(source_, line_, "extra values in record");
  }

 private:
  [[noreturn]] void bad_token(std::string_view tok) {
    fail_line(source_, line_, "cannot parse value '" + std::string(tok) + "'");
  }

  std::string_view bytes_;
  std::size_t pos_;
  std::size_t line_;
  std::string_view source_;
  std::vector<std::string_view> tokens_;
  std::size_t next_token_ = 0;
};

class BinaryReader {
 public:
  BinaryReader(std::string_view bytes, std::size_t offset, std::string_view source)
      : bytes_(bytes), pos_(offset), source_(source) {}

  double number(ScalarType type) {
    const std::size_t n = scalar_size(type);
    if (pos_ + n > bytes_.size()) fail_byte(source_, pos_, "truncated body");
    const double v = load_scalar(bytes_.data() + pos_, type);
    pos_ += n;
    return v;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_;
  std::string_view source_;
};

template <typename Reader>
void skip_property(Reader& reader, const Property& prop) {
  if (!prop.is_list) {
    reader.number(prop.type);
    return;
  }
  const double count = reader.number(prop.count_type);
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(count); ++k) reader.number(prop.type);
}

template <typename Reader>
void read_body(Reader& reader, const Header& header, const VertexLayout& layout,
               VertexSink& sink, std::size_t vertex_element) {
  constexpr bool kAscii = std::is_same_v<Reader, AsciiReader>;
  for (std::size_t e = 0; e <= vertex_element; ++e) {
    const Element& element = header.elements[e];
    for (std::size_t r = 0; r < element.count; ++r) {
      if constexpr (kAscii) reader.next_record();
      if (e == vertex_element) {
        for (std::size_t p = 0; p < element.properties.size(); ++p) {
          const Property& prop = element.properties[p];
          if (layout.slots[p] == Slot::kSkip) {
            skip_property(reader, prop);
          } else {
            sink.store(static_cast<Eigen::Index>(r), layout.slots[p], reader.number(prop.type));
          }
        }
      } else {
        for (const auto& prop : element.properties) skip_property(reader, prop);
      }
      if constexpr (kAscii) reader.end_record();
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("I/O error reading '" + path.string() + "'");
  return data;
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.append(buf, sizeof(T));
}

void append_real(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.9g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

PointCloud parse_ply(std::string_view bytes, std::optional<int> precision,
                     std::string_view source) {
  const Header header = parse_header(bytes, source);

  std::size_t vertex_element = header.elements.size();
  for (std::size_t e = 0; e < header.elements.size(); ++e) {
    if (header.elements[e].name == "vertex") {
      vertex_element = e;
      break;
    }
  }
  if (vertex_element == header.elements.size()) {
    throw DataError(std::string(source) + ": no vertex element");
  }
  const Element& vertex = header.elements[vertex_element];
  const VertexLayout layout = check_vertex_layout(vertex, source);

  const auto n = static_cast<Eigen::Index>(vertex.count);
  VertexSink sink{Points(3, n), Colors(3, layout.has_color ? n : 0),
                  Normals(3, layout.has_normal ? n : 0)};

  if (header.format == PlyFormat::kAscii) {
    AsciiReader reader(bytes, header.body_offset, header.body_line, source);
    read_body(reader, header, layout, sink, vertex_element);
  } else {
    BinaryReader reader(bytes, header.body_offset, source);
    read_body(reader, header, layout, sink, vertex_element);
  }

  std::optional<Colors> colors;
  std::optional<Normals> normals;
  if (layout.has_color) colors = std::move(sink.colors);
  if (layout.has_normal) normals = std::move(sink.normals);
  if (!precision) precision = header.precision;
  if (!precision) precision = infer_precision(sink.points);
  return PointCloud(std::move(sink.points), std::move(colors), std::move(normals), precision);
}

PointCloud read_ply(const std::filesystem::path& path, std::optional<int> precision) {
  const std::string data = read_file(path);
  return parse_ply(data, precision, path.string());
}

std::string serialize_ply(const PointCloud& cloud, PlyFormat format) {
  if (cloud.empty()) throw UsageError("cannot write an empty point cloud");
  const bool ascii = format == PlyFormat::kAscii;
  const char* real = "double";

  std::string out;
  out += "ply\n";
  out += ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  if (cloud.precision()) out += "comment precision " + std::to_string(*cloud.precision()) + "\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  for (const char* axis : {"x", "y", "z"}) out += std::string("property ") + real + " " + axis + "\n";
  if (cloud.has_normals()) {
    for (const char* axis : {"nx", "ny", "nz"}) {
      out += std::string("property ") + real + " " + axis + "\n";
    }
  }
  if (cloud.has_colors()) {
    for (const char* c : {"red", "green", "blue"}) out += std::string("property uchar ") + c + "\n";
  }
  out += "end_header\n";

  const std::size_t record = 24 + (cloud.has_normals() ? 24 : 0) + (cloud.has_colors() ? 3 : 0);
  out.reserve(out.size() + record * static_cast<std::size_t>(cloud.size()));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (ascii) {
      append_real(out, cloud.points()(0, i));
      for (int a = 1; a < 3; ++a) {
        out += ' ';
        append_real(out, cloud.points()(a, i));
      }
      if (cloud.has_normals()) {
        for (int a = 0; a < 3; ++a) {
          out += ' ';
          append_real(out, cloud.normals()(a, i));
        }
      }
      if (cloud.has_colors()) {
        for (int a = 0; a < 3; ++a) out += ' ' + std::to_string(cloud.colors()(a, i));
      }
      out += '\n';
    } else {
      for (int a = 0; a < 3; ++a) append_le<double>(out, cloud.points()(a, i));
      if (cloud.has_normals()) {
        for (int a = 0; a < 3; ++a) append_le<double>(out, cloud.normals()(a, i));
      }
      if (cloud.has_colors()) {
        for (int a = 0; a < 3; ++a) append_le<std::uint8_t>(out, cloud.colors()(a, i));
      }
    }
  }
  return out;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  const std::string data = serialize_ply(cloud, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("I/O error writing '" + path.string() + "'");
}

}  // namespace cloudgauge
