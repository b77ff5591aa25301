#include "tcoh/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tcoh::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("tcoh file '" + path + "': " + what);
}

[[noreturn]] void fail_errno(const std::string& path, const std::string& op) {
  fail(path, op + ": " + std::strerror(errno));
}

void put_u32(unsigned char* b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* b) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void encode_header(const TcohHeader& h, unsigned char buf[kHeaderBytes]) {
  buf[0] = 'T';
  buf[1] = 'C';
  buf[2] = 'O';
  buf[3] = 'H';
  put_u32(buf + 4, kFormatVersion);
  put_u64(buf + 8, static_cast<std::uint64_t>(h.n));
  put_u64(buf + 16, static_cast<std::uint64_t>(h.p));
  buf[24] = h.dtype;
  buf[25] = h.layout;
}

TcohHeader decode_header(const std::string& path,
                         const unsigned char buf[kHeaderBytes]) {
  if (std::memcmp(buf, "TCOH", 4) != 0) fail(path, "bad magic, not a TCOH file");
  const std::uint32_t ver = get_u32(buf + 4);
  if (ver != kFormatVersion) {
    std::ostringstream msg;
    msg << "unsupported format version " << ver << " (expected "
        << kFormatVersion << ")";
    fail(path, msg.str());
  }
  TcohHeader h;
  h.n = static_cast<std::int64_t>(get_u64(buf + 8));
  h.p = static_cast<std::int64_t>(get_u64(buf + 16));
  h.dtype = buf[24];
  h.layout = buf[25];
  if (h.dtype != kDtypeFloat64) fail(path, "unsupported dtype byte");
  if (h.layout != kLayoutRowMajor) fail(path, "unsupported layout byte");
  if (h.n < 1 || h.p < 1) fail(path, "non-positive dimensions in header");
  return h;
}

void pread_full(int fd, void* buf, std::size_t len, std::int64_t off,
                const std::string& path) {
  auto* dst = static_cast<char*>(buf);
  while (len > 0) {
    const ssize_t got = ::pread(fd, dst, len, off);
    if (got < 0) {
      if (errno == EINTR) continue;
      fail_errno(path, "pread");
    }
    if (got == 0) fail(path, "truncated file");
    dst += got;
    len -= static_cast<std::size_t>(got);
    off += got;
  }
}

void write_full(int fd, const void* buf, std::size_t len,
                const std::string& path) {
  const auto* src = static_cast<const char*>(buf);
  while (len > 0) {
    const ssize_t put = ::write(fd, src, len);
    if (put < 0) {
      if (errno == EINTR) continue;
      fail_errno(path, "write");
    }
    src += put;
    len -= static_cast<std::size_t>(put);
  }
}

void pwrite_full(int fd, const void* buf, std::size_t len, std::int64_t off,
                 const std::string& path) {
  const auto* src = static_cast<const char*>(buf);
  while (len > 0) {
    const ssize_t put = ::pwrite(fd, src, len, off);
    if (put < 0) {
      if (errno == EINTR) continue;
      fail_errno(path, "pwrite");
    }
    src += put;
    len -= static_cast<std::size_t>(put);
    off += put;
  }
}

int open_read(const std::string& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) fail_errno(path, "open");
  return fd;
}

class FdGuard {
 public:
  explicit FdGuard(int fd) : fd_(fd) {}
  ~FdGuard() {
    if (fd_ >= 0) ::close(fd_);
  }
  FdGuard(const FdGuard&) = delete;
  FdGuard& operator=(const FdGuard&) = delete;

 private:
  int fd_;
};

}  // namespace

TcohHeader read_tcoh_header(const std::string& path) {
  const int fd = open_read(path);
  FdGuard guard(fd);
  unsigned char buf[kHeaderBytes];
  pread_full(fd, buf, kHeaderBytes, 0, path);
  return decode_header(path, buf);
}

Matrix read_tcoh(const std::string& path) {
  const int fd = open_read(path);
  FdGuard guard(fd);
  unsigned char buf[kHeaderBytes];
  pread_full(fd, buf, kHeaderBytes, 0, path);
  const TcohHeader h = decode_header(path, buf);
  const std::int64_t end = ::lseek(fd, 0, SEEK_END);
  if (end != kHeaderBytes + h.n * h.p * 8)
    fail(path, "file size does not match header dimensions");
  Matrix m(h.n, h.p);
  std::vector<double> row(static_cast<std::size_t>(h.p));
  for (std::int64_t i = 0; i < h.n; ++i) {
    pread_full(fd, row.data(), static_cast<std::size_t>(h.p) * 8,
               kHeaderBytes + i * h.p * 8, path);
    for (std::int64_t j = 0; j < h.p; ++j) m.at(i, j) = row[j];
  }
  return m;
}

void write_tcoh(const std::string& path, const Matrix& m) {
  if (m.n < 1 || m.p < 1)
    throw std::invalid_argument("write_tcoh: empty matrix");
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) fail_errno(path, "open");
  FdGuard guard(fd);
  unsigned char hdr[kHeaderBytes];
  encode_header({m.n, m.p, kDtypeFloat64, kLayoutRowMajor}, hdr);
  write_full(fd, hdr, kHeaderBytes, path);
  std::vector<double> row(static_cast<std::size_t>(m.p));
  for (std::int64_t i = 0; i < m.n; ++i) {
    for (std::int64_t j = 0; j < m.p; ++j) row[j] = m.at(i, j);
    write_full(fd, row.data(), static_cast<std::size_t>(m.p) * 8, path);
  }
}

void write_tcoh_stream(const std::string& path, const BlockSource& source,
                       std::int64_t block_cols) {
  const std::int64_t n = source.rows();
  const std::int64_t p = source.cols();
  if (n < 1 || p < 1)
    throw std::invalid_argument("write_tcoh_stream: empty source");
  if (block_cols < 1)
    throw std::invalid_argument("write_tcoh_stream: block_cols >= 1 required");
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) fail_errno(path, "open");
  FdGuard guard(fd);
  unsigned char hdr[kHeaderBytes];
  encode_header({n, p, kDtypeFloat64, kLayoutRowMajor}, hdr);
  pwrite_full(fd, hdr, kHeaderBytes, 0, path);
  const std::int64_t bc = std::min(block_cols, p);
  std::vector<double> block(static_cast<std::size_t>(n * bc));
  std::vector<double> rowseg(static_cast<std::size_t>(bc));
  for (std::int64_t c0 = 0; c0 < p; c0 += bc) {
    const std::int64_t cnt = std::min(bc, p - c0);
    source.fetch(c0, cnt, block.data(), n);
    // disk layout is row-major, so each row contributes one strided segment
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t c = 0; c < cnt; ++c) rowseg[c] = block[c * n + i];
      pwrite_full(fd, rowseg.data(), static_cast<std::size_t>(cnt) * 8,
                  kHeaderBytes + (i * p + c0) * 8, path);
    }
  }
}

TcohFileSource::TcohFileSource(const std::string& path) : path_(path) {
  fd_ = open_read(path);
  unsigned char buf[kHeaderBytes];
  try {
    pread_full(fd_, buf, kHeaderBytes, 0, path_);
    hdr_ = decode_header(path_, buf);
    const std::int64_t end = ::lseek(fd_, 0, SEEK_END);
    if (end != kHeaderBytes + hdr_.n * hdr_.p * 8)
      fail(path_, "file size does not match header dimensions");
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
}

TcohFileSource::~TcohFileSource() {
  if (fd_ >= 0) ::close(fd_);
}

void TcohFileSource::fetch(std::int64_t col0, std::int64_t count, double* dst,
                           std::int64_t ld) const {
  if (col0 < 0 || count < 0 || col0 + count > hdr_.p)
    throw std::invalid_argument("TcohFileSource::fetch: column range out of bounds");
  std::vector<double> rowseg(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < hdr_.n; ++i) {
    pread_full(fd_, rowseg.data(), static_cast<std::size_t>(count) * 8,
               kHeaderBytes + (i * hdr_.p + col0) * 8, path_);
    for (std::int64_t c = 0; c < count; ++c) dst[c * ld + i] = rowseg[c];
  }
}

std::vector<double> read_mu_json(const std::string& path,
                                 std::int64_t expected_p) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(path, std::string("JSON parse error: ") + e.what());
  }
  const nlohmann::json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("mu") && j["mu"].is_array()) {
    arr = &j["mu"];
  } else {
    fail(path, "expected a JSON array of means or an object with a 'mu' array");
  }
  std::vector<double> mu;
  mu.reserve(arr->size());
  for (const auto& v : *arr) {
    if (!v.is_number()) fail(path, "non-numeric entry in means array");
    mu.push_back(v.get<double>());
  }
  if (expected_p >= 0 && static_cast<std::int64_t>(mu.size()) != expected_p) {
    std::ostringstream msg;
    msg << "means array has " << mu.size() << " entries, matrix has "
        << expected_p << " columns";
    fail(path, msg.str());
  }
  return mu;
}

}  // namespace tcoh::io
