#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "isac/receiver.hpp"

namespace isac {

// RA tensor stream format, all fields little-endian:
//
//   header   "RATN" | u16 version | u32 n_range | u32 n_tx | u32 n_rx |
//            f64 bin_size_m | f32 tx_angles[n_tx] | f32 rx_angles[n_rx]
//   record   u64 sweep_index | f64 t_start_s | f32 power[n_range*n_tx*n_rx]
//
// Payload order is range-major, then tx, then rx. Records repeat until end
// of stream with strictly increasing sweep_index.

inline constexpr char kTensorMagic[4] = {'R', 'A', 'T', 'N'};
inline constexpr std::uint16_t kTensorFormatVersion = 1;

struct TensorFileHeader {
  std::uint16_t version = kTensorFormatVersion;
  std::uint32_t n_range = 0;
  std::uint32_t n_tx = 0;
  std::uint32_t n_rx = 0;
  double bin_size_m = 0.0;
  std::vector<float> tx_angles_deg;
  std::vector<float> rx_angles_deg;

  static TensorFileHeader describe(const RaTensor& t);

  std::uint64_t header_bytes() const { return 4 + 2 + 3 * 4 + 8 + 4ull * (n_tx + n_rx); }
  std::uint64_t payload_values() const { return std::uint64_t{n_range} * n_tx * n_rx; }
  std::uint64_t record_bytes() const { return 8 + 8 + 4 * payload_values(); }
  bool matches(const RaTensor& t) const;
};

class TensorWriter {
 public:
  /// Writes the header immediately.
  TensorWriter(std::ostream& out, TensorFileHeader header);

  /// Throws StreamError if `t` does not match the header or its sweep index
  /// does not increase.
  void write(const RaTensor& t);

  const TensorFileHeader& header() const { return header_; }

 private:
  std::ostream& out_;
  TensorFileHeader header_;
  std::optional<std::uint64_t> last_sweep_;
};

class TensorReader {
 public:
  /// Reads and validates the header. Throws FormatError.
  explicit TensorReader(std::istream& in);

  /// Next sweep, or nullopt at a clean end of stream. Throws FormatError on
  /// a truncated record or a non-increasing sweep index; no partial record
  /// is ever returned.
  std::optional<RaTensor> next();

  const TensorFileHeader& header() const { return header_; }
  /// Bytes consumed so far.
  std::uint64_t offset() const { return offset_; }

 private:
  std::size_t read_some(char* dst, std::size_t n);

  std::istream& in_;
  TensorFileHeader header_;
  std::uint64_t offset_ = 0;
  std::optional<std::uint64_t> last_sweep_;
  std::vector<char> buffer_;
};

}  // namespace isac
