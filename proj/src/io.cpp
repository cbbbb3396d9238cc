#include "pnpkit/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <sstream>

namespace pnpkit {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void append_le_double(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double read_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::string raw_header(const Shape& shape) {
  nlohmann::json meta;
  meta["shape"] = shape;
  return std::string(kRawMagic, 8) + meta.dump() + "\n";
}

// Cursor over a Netpbm header: whitespace and '#' comments between tokens.
class NetpbmCursor {
 public:
  explicit NetpbmCursor(const std::string& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long integer(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000) throw ParseError(std::string("integer too large for ") + what, start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size()) throw ParseError(std::string("unexpected end of file reading ") + what, pos_);
      throw ParseError(std::string("expected integer for ") + what, pos_);
    }
    return value;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::string encode_raw(const Signal& x) {
  std::string out = raw_header(x.shape());
  out.reserve(out.size() + static_cast<std::size_t>(x.size()) * 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) append_le_double(out, x[i]);
  return out;
}

Signal parse_raw(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kRawMagic, 8) != 0) {
    throw ParseError("missing PNPK0001 magic", 0);
  }
  const std::size_t newline = bytes.find('\n', 8);
  if (newline == std::string::npos) throw ParseError("unterminated JSON header", bytes.size());
  Shape shape;
  try {
    const auto meta = nlohmann::json::parse(bytes.substr(8, newline - 8));
    shape = meta.at("shape").get<Shape>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad JSON header: ") + e.what(), 8);
  }
  std::size_t n = 0;
  try {
    n = shape_size(shape);
  } catch (const ShapeError&) {
    throw ParseError("invalid shape " + shape_string(shape), 8);
  }
  if (shape.empty()) throw ParseError("empty shape", 8);
  const std::size_t payload = newline + 1;
  const std::size_t expected = payload + 8 * n;
  if (bytes.size() < expected) throw ParseError("truncated payload", bytes.size());
  if (bytes.size() > expected) throw ParseError("trailing bytes after payload", expected);
  Vec values(static_cast<Eigen::Index>(n));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + payload);
  for (std::size_t i = 0; i < n; ++i) values[static_cast<Eigen::Index>(i)] = read_le_double(p + 8 * i);
  if (shape.size() > 3) throw ParseError("rank above 3 is not a signal", 8);
  return Signal(shape, std::move(values));
}

Signal parse_netpbm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("missing Netpbm magic", 0);
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw ParseError(std::string("unsupported Netpbm variant P") + kind, 1);
  }
  const bool ascii = kind == '2' || kind == '3';
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;

  NetpbmCursor cur(bytes);
  cur.set_pos(2);
  const long width = cur.integer("width");
  const long height = cur.integer("height");
  const std::size_t maxval_pos = cur.pos();
  const long maxval = cur.integer("maxval");
  if (width <= 0 || height <= 0) throw ParseError("non-positive image size", maxval_pos);
  if (maxval <= 0 || maxval > 65535) throw ParseError("maxval must lie in 1..65535", maxval_pos);

  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  Vec values(static_cast<Eigen::Index>(count));
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t at = cur.pos();
      const long v = cur.integer("sample");
      if (v > maxval) throw ParseError("sample exceeds maxval", at);
      values[static_cast<Eigen::Index>(i)] = static_cast<double>(v) / maxval;
    }
  } else {
    // Exactly one whitespace byte separates the header from binary data.
    std::size_t pos = cur.pos();
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      throw ParseError("missing whitespace before binary data", pos);
    }
    ++pos;
    const std::size_t width_bytes = maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + count * width_bytes) throw ParseError("truncated binary data", bytes.size());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t i = 0; i < count; ++i) {
      long v = width_bytes == 2 ? (static_cast<long>(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
      if (v > maxval) throw ParseError("sample exceeds maxval", pos + i * width_bytes);
      values[static_cast<Eigen::Index>(i)] = static_cast<double>(v) / maxval;
    }
  }
  Shape shape = channels == 1 ? Shape{static_cast<int>(height), static_cast<int>(width)}
                              : Shape{static_cast<int>(height), static_cast<int>(width), 3};
  return Signal(shape, std::move(values));
}

std::string encode_netpbm(const Signal& x, const SaveOptions& opts) {
  if (opts.maxval != 255 && opts.maxval != 65535) throw InvalidArgument("maxval must be 255 or 65535");
  int channels = 1;
  if (x.rank() == 3 && x.shape()[2] == 3) {
    channels = 3;
  } else if (x.rank() != 2) {
    throw ShapeError("PGM needs shape [rows, cols], PPM needs [rows, cols, 3]; got " +
                     shape_string(x.shape()));
  }
  const int height = x.shape()[0];
  const int width = x.shape()[1];
  const bool ascii = opts.encoding == NetpbmEncoding::Ascii;
  const char* magic = channels == 1 ? (ascii ? "P2" : "P5") : (ascii ? "P3" : "P6");

  std::ostringstream out;
  out << magic << '\n' << width << ' ' << height << '\n' << opts.maxval << '\n';
  std::string body;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = std::isfinite(x[i]) ? std::clamp(x[i], 0.0, 1.0) : 0.0;
    const long q = std::lround(v * opts.maxval);
    if (ascii) {
      out << q << ((i + 1) % (width * channels) == 0 ? '\n' : ' ');
    } else if (opts.maxval > 255) {
      body.push_back(static_cast<char>((q >> 8) & 0xff));
      body.push_back(static_cast<char>(q & 0xff));
    } else {
      body.push_back(static_cast<char>(q));
    }
  }
  return out.str() + body;
}

Signal load_signal(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  const std::string bytes = read_file(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return parse_netpbm(bytes);
  if (ext == ".pnpk" || ext == ".raw" || ext == ".bin") return parse_raw(bytes);
  throw InvalidArgument("unknown signal format '" + ext + "' for " + path.string());
}

void save_signal(const Signal& x, const std::filesystem::path& path, const SaveOptions& opts) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    write_file(path, encode_netpbm(x, opts));
  } else if (ext == ".pnpk" || ext == ".raw" || ext == ".bin") {
    write_file(path, encode_raw(x));
  } else {
    throw InvalidArgument("unknown signal format '" + ext + "' for " + path.string());
  }
}

RawRecordWriter::RawRecordWriter(const std::filesystem::path& path, const Shape& record_shape,
                                 int count)
    : out_(path, std::ios::binary | std::ios::trunc),
      record_size_(static_cast<Eigen::Index>(shape_size(record_shape))),
      count_(count) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  if (count <= 0) throw InvalidArgument("record count must be positive");
  Shape shape{count};
  shape.insert(shape.end(), record_shape.begin(), record_shape.end());
  const std::string header = raw_header(shape);
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

RawRecordWriter::~RawRecordWriter() = default;

void RawRecordWriter::write(const Vec& record) {
  if (record.size() != record_size_) throw ShapeError("record size mismatch");
  if (written_ >= count_) throw InvalidArgument("more records than declared");
  std::string chunk;
  chunk.reserve(static_cast<std::size_t>(record_size_) * 8);
  for (Eigen::Index i = 0; i < record.size(); ++i) append_le_double(chunk, record[i]);
  out_.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  ++written_;
}

namespace {

void put_number(std::ostringstream& out, double v) {
  if (std::isnan(v)) return;
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

double parse_field(const std::string& field, std::size_t line) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw InvalidArgument("bad numeric field '" + field + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

std::string format_trace(const Trace& trace) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.iter << ',';
    put_number(out, r.objective);
    out << ',';
    put_number(out, r.step_residual);
    out << ',';
    put_number(out, r.fp_residual);
    out << ',';
    put_number(out, r.psnr);
    out << ',';
    put_number(out, r.seconds);
    out << '\n';
  }
  return out.str();
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  write_file(path, format_trace(trace));
}

Trace parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError("unexpected trace header '" + line + "'", 0);
  offset += line.size() + 1;
  Trace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields on line " + std::to_string(lineno), offset);
    }
    TraceRow row;
    try {
      const double iter = parse_field(fields[0], lineno);
      if (std::isnan(iter) || iter != std::floor(iter)) throw InvalidArgument("bad iteration index");
      row.iter = static_cast<int>(iter);
      row.objective = parse_field(fields[1], lineno);
      row.step_residual = parse_field(fields[2], lineno);
      row.fp_residual = parse_field(fields[3], lineno);
      row.psnr = parse_field(fields[4], lineno);
      row.seconds = parse_field(fields[5], lineno);
      trace.push(row);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), offset);
    }
    offset += line.size() + 1;
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

}  // namespace pnpkit
