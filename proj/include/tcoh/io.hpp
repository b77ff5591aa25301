#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcoh/matrix.hpp"

namespace tcoh::io {

// TCOH v1 container: magic "TCOH", u32 version, u64 n, u64 p, one dtype byte
// (1 = float64), one layout byte (0 = row-major), all little-endian, followed
// by n*p values. Header is exactly 26 bytes. A JSON sidecar at
// "<file>.meta.json" may carry generation metadata; it is informational and
// never required to read the matrix.
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::int64_t kHeaderBytes = 26;
inline constexpr std::uint8_t kDtypeFloat64 = 1;
inline constexpr std::uint8_t kLayoutRowMajor = 0;

struct TcohHeader {
  std::int64_t n = 0;
  std::int64_t p = 0;
  std::uint8_t dtype = kDtypeFloat64;
  std::uint8_t layout = kLayoutRowMajor;
};

TcohHeader read_tcoh_header(const std::string& path);
Matrix read_tcoh(const std::string& path);
void write_tcoh(const std::string& path, const Matrix& m);

// Stream a column source to disk block by block; peak memory is
// n * block_cols doubles regardless of p.
void write_tcoh_stream(const std::string& path, const BlockSource& source,
                       std::int64_t block_cols = 1024);

// Column access into a TCOH file without loading it; safe for concurrent
// fetch calls (positioned reads on a shared descriptor).
class TcohFileSource final : public BlockSource {
 public:
  explicit TcohFileSource(const std::string& path);
  ~TcohFileSource() override;
  TcohFileSource(const TcohFileSource&) = delete;
  TcohFileSource& operator=(const TcohFileSource&) = delete;

  std::int64_t rows() const override { return hdr_.n; }
  std::int64_t cols() const override { return hdr_.p; }
  void fetch(std::int64_t col0, std::int64_t count, double* dst,
             std::int64_t ld) const override;

 private:
  int fd_ = -1;
  TcohHeader hdr_;
  std::string path_;
};

// Known column means for the known-mean coherence mode: a JSON array of p
// numbers, or an object with a "mu" array member.
std::vector<double> read_mu_json(const std::string& path,
                                 std::int64_t expected_p);

}  // namespace tcoh::io
