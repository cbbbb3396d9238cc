#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "pnpkit/core.hpp"

namespace pnpkit {

enum class NetpbmEncoding { Binary, Ascii };

struct SaveOptions {
  NetpbmEncoding encoding = NetpbmEncoding::Binary;
  int maxval = 255;  // 255 or 65535
};

/// Loads a signal; the format follows the extension (.pnpk/.raw, .pgm, .ppm).
///
/// Raw files round-trip bit-exactly. PGM/PPM samples are scaled by 1/maxval, so
/// a PGM loads as shape [rows, cols] and a PPM as [rows, cols, 3].
Signal load_signal(const std::filesystem::path& path);
void save_signal(const Signal& x, const std::filesystem::path& path, const SaveOptions& opts = {});

/// In-memory variants used by the file functions.
Signal parse_raw(const std::string& bytes);
std::string encode_raw(const Signal& x);
Signal parse_netpbm(const std::string& bytes);
std::string encode_netpbm(const Signal& x, const SaveOptions& opts);

inline constexpr char kRawMagic[] = "PNPK0001";

/// Streams equally-shaped records into one raw file of shape [count, ...record].
class RawRecordWriter {
 public:
  RawRecordWriter(const std::filesystem::path& path, const Shape& record_shape, int count);
  ~RawRecordWriter();
  RawRecordWriter(const RawRecordWriter&) = delete;
  RawRecordWriter& operator=(const RawRecordWriter&) = delete;

  void write(const Vec& record);
  int written() const noexcept { return written_; }

 private:
  std::ofstream out_;
  Eigen::Index record_size_;
  int count_;
  int written_ = 0;
};

/// CSV with header iter,objective,step_residual,fp_residual,psnr,seconds.
void write_trace(const Trace& trace, const std::filesystem::path& path);
std::string format_trace(const Trace& trace);
Trace read_trace(const std::filesystem::path& path);
Trace parse_trace(const std::string& text);

inline constexpr char kTraceHeader[] = "iter,objective,step_residual,fp_residual,psnr,seconds";

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace pnpkit
