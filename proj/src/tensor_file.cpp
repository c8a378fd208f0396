#include "isac/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <string>

namespace isac {

namespace {

template <typename U>
void put_le(std::vector<char>& buf, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((value >> (8 * i)) & 0xffu));
}

void put_f32(std::vector<char>& buf, float v) { put_le(buf, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::vector<char>& buf, double v) { put_le(buf, std::bit_cast<std::uint64_t>(v)); }

template <typename U>
U get_le(const char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

float get_f32(const char* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }
double get_f64(const char* p) { return std::bit_cast<double>(get_le<std::uint64_t>(p)); }

}  // namespace

TensorFileHeader TensorFileHeader::describe(const RaTensor& t) {
  TensorFileHeader h;
  h.n_range = static_cast<std::uint32_t>(t.n_range());
  h.n_tx = static_cast<std::uint32_t>(t.n_tx());
  h.n_rx = static_cast<std::uint32_t>(t.n_rx());
  h.bin_size_m = t.bin_size_m;
  h.tx_angles_deg = t.tx_angles_deg;
  h.rx_angles_deg = t.rx_angles_deg;
  return h;
}

bool TensorFileHeader::matches(const RaTensor& t) const {
  return t.n_range() == static_cast<int>(n_range) && t.n_tx() == static_cast<int>(n_tx) &&
         t.n_rx() == static_cast<int>(n_rx) && t.power.cols() == static_cast<Eigen::Index>(n_tx * n_rx);
}

TensorWriter::TensorWriter(std::ostream& out, TensorFileHeader header) : out_(out), header_(std::move(header)) {
  if (header_.tx_angles_deg.size() != header_.n_tx || header_.rx_angles_deg.size() != header_.n_rx) {
    throw StreamError("tensor writer: angle tables do not match the header dimensions");
  }
  std::vector<char> buf(kTensorMagic, kTensorMagic + 4);
  put_le(buf, header_.version);
  put_le(buf, header_.n_range);
  put_le(buf, header_.n_tx);
  put_le(buf, header_.n_rx);
  put_f64(buf, header_.bin_size_m);
  for (float a : header_.tx_angles_deg) put_f32(buf, a);
  for (float a : header_.rx_angles_deg) put_f32(buf, a);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw IoError("tensor writer: failed to write header");
}

void TensorWriter::write(const RaTensor& t) {
  if (!header_.matches(t)) {
    throw StreamError("tensor writer: sweep " + std::to_string(t.sweep_index) + " does not match the header");
  }
  if (last_sweep_ && t.sweep_index <= *last_sweep_) {
    throw StreamError("tensor writer: sweep index " + std::to_string(t.sweep_index) + " is not increasing");
  }
  std::vector<char> buf;
  buf.reserve(header_.record_bytes());
  put_le(buf, t.sweep_index);
  put_f64(buf, t.t_start_s);
  for (int r = 0; r < t.n_range(); ++r) {
    for (Eigen::Index b = 0; b < t.power.cols(); ++b) put_f32(buf, t.power(r, b));
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw IoError("tensor writer: failed to write sweep " + std::to_string(t.sweep_index));
  last_sweep_ = t.sweep_index;
}

std::size_t TensorReader::read_some(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  offset_ += got;
  return got;
}

TensorReader::TensorReader(std::istream& in) : in_(in) {
  char fixed[26];
  if (read_some(fixed, sizeof fixed) != sizeof fixed) {
    throw FormatError("tensor file: truncated header", 0);
  }
  if (std::memcmp(fixed, kTensorMagic, 4) != 0) throw FormatError("tensor file: bad magic, expected RATN", 0);
  header_.version = get_le<std::uint16_t>(fixed + 4);
  if (header_.version != kTensorFormatVersion) {
    throw FormatError("tensor file: unsupported version " + std::to_string(header_.version), 4);
  }
  header_.n_range = get_le<std::uint32_t>(fixed + 6);
  header_.n_tx = get_le<std::uint32_t>(fixed + 10);
  header_.n_rx = get_le<std::uint32_t>(fixed + 14);
  header_.bin_size_m = get_f64(fixed + 18);
  if (header_.n_range == 0 || header_.n_tx == 0 || header_.n_rx == 0) {
    throw FormatError("tensor file: zero dimension in header", 6);
  }
  if (header_.payload_values() > (std::uint64_t{1} << 32)) {
    throw FormatError("tensor file: implausible dimensions in header", 6);
  }

  const std::uint64_t table_start = offset_;
  std::vector<char> tables(4ull * (header_.n_tx + header_.n_rx));
  if (read_some(tables.data(), tables.size()) != tables.size()) {
    throw FormatError("tensor file: truncated angle tables", table_start);
  }
  for (std::uint32_t i = 0; i < header_.n_tx; ++i) header_.tx_angles_deg.push_back(get_f32(tables.data() + 4 * i));
  for (std::uint32_t i = 0; i < header_.n_rx; ++i) {
    header_.rx_angles_deg.push_back(get_f32(tables.data() + 4 * (header_.n_tx + i)));
  }
}

std::optional<RaTensor> TensorReader::next() {
  const std::uint64_t record_start = offset_;
  buffer_.resize(header_.record_bytes());
  const std::size_t got = read_some(buffer_.data(), buffer_.size());
  if (got == 0) return std::nullopt;
  if (got != buffer_.size()) {
    throw FormatError("tensor file: truncated sweep record (" + std::to_string(got) + " of " +
                          std::to_string(buffer_.size()) + " bytes)",
                      record_start);
  }

  RaTensor t = RaTensor::zeros(static_cast<int>(header_.n_range), header_.tx_angles_deg, header_.rx_angles_deg);
  t.sweep_index = get_le<std::uint64_t>(buffer_.data());
  t.t_start_s = get_f64(buffer_.data() + 8);
  t.bin_size_m = header_.bin_size_m;
  if (last_sweep_ && t.sweep_index <= *last_sweep_) {
    throw FormatError("tensor file: sweep index " + std::to_string(t.sweep_index) + " is not increasing",
                      record_start);
  }
  const char* p = buffer_.data() + 16;
  for (int r = 0; r < t.n_range(); ++r) {
    for (Eigen::Index b = 0; b < t.power.cols(); ++b, p += 4) t.power(r, b) = get_f32(p);
  }
  last_sweep_ = t.sweep_index;
  return t;
}

}  // namespace isac
