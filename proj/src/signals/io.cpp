#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sinnet/error.hpp"
#include "sinnet/signal.hpp"

namespace sinnet {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read failed for " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  out.flush();
  if (!out) throw DataError("write failed for " + path.string());
}

[[noreturn]] void malformed(const std::string& what) {
  throw FormatError(FormatErrorKind::kMalformedHeader, what);
}

// --- PGM header tokenizer ---

class PgmHeader {
 public:
  explicit PgmHeader(std::span<const std::uint8_t> bytes) : b_(bytes) {}

  std::size_t number(const char* field) {
    skip_space_and_comments();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) malformed(std::string("PGM header: missing ") + field);
    std::size_t v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + static_cast<std::size_t>(b_[pos_] - '0');
      if (v > (1u << 30)) malformed(std::string("PGM header: ") + field + " too large");
      ++pos_;
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_space() const { return pos_ < b_.size() && std::isspace(b_[pos_]); }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 2;
};

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Signal parse_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') malformed("PGM: missing magic number");
  if (bytes[1] != '5') {
    throw FormatError(FormatErrorKind::kUnsupportedLayout, "PGM: only binary P5 is supported");
  }
  PgmHeader h(bytes);
  const std::size_t width = h.number("width");
  const std::size_t height = h.number("height");
  const std::size_t maxval = h.number("maxval");
  if (width == 0 || height == 0) malformed("PGM header: zero image dimension");
  if (maxval == 0) malformed("PGM header: maxval must be positive");
  if (maxval > 255) {
    throw FormatError(FormatErrorKind::kUnsupportedBitDepth, "PGM: only 8-bit images (maxval <= 255) are supported");
  }
  if (!h.at_space()) malformed("PGM header: expected whitespace after maxval");
  h.advance();
  const std::size_t need = width * height;
  if (bytes.size() - h.pos() < need) {
    throw FormatError(FormatErrorKind::kTruncatedPayload,
                      "PGM: payload holds " + std::to_string(bytes.size() - h.pos()) + " of " +
                          std::to_string(need) + " bytes");
  }
  std::vector<double> values(need);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < need; ++i) values[i] = static_cast<double>(bytes[h.pos() + i]) * scale;
  return Signal({height, width}, std::move(values));
}

Signal parse_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
    malformed("WAV: missing RIFF/WAVE header");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t bits = 0;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + static_cast<long>(pos), bytes.begin() + static_cast<long>(pos) + 4);
    const std::size_t len = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (len < 16 || body + 16 > bytes.size()) malformed("WAV: fmt chunk too short");
      const std::uint16_t format = le16(bytes, body);
      const std::uint16_t channels = le16(bytes, body + 2);
      bits = le16(bytes, body + 14);
      if (format != 1) throw FormatError(FormatErrorKind::kUnsupportedLayout, "WAV: only PCM is supported");
      if (channels != 1) throw FormatError(FormatErrorKind::kUnsupportedLayout, "WAV: only mono is supported");
      if (bits != 16) {
        throw FormatError(FormatErrorKind::kUnsupportedBitDepth,
                          "WAV: only 16-bit samples are supported, got " + std::to_string(bits));
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) malformed("WAV: data chunk before fmt chunk");
      if (body + len > bytes.size()) {
        throw FormatError(FormatErrorKind::kTruncatedPayload,
                          "WAV: data chunk declares " + std::to_string(len) + " bytes but " +
                              std::to_string(bytes.size() - body) + " remain");
      }
      if (len % 2 != 0) throw FormatError(FormatErrorKind::kTruncatedPayload, "WAV: odd data length");
      if (len == 0) throw FormatError(FormatErrorKind::kTruncatedPayload, "WAV: no samples");
      std::vector<double> values(len / 2);
      for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = static_cast<double>(static_cast<std::int16_t>(le16(bytes, body + 2 * i))) / 32768.0;
      }
      const std::size_t count = values.size();
      return Signal({count}, std::move(values));
    }
    pos = body + len + (len % 2);
  }
  if (!have_fmt) malformed("WAV: missing fmt chunk");
  throw FormatError(FormatErrorKind::kTruncatedPayload, "WAV: missing data chunk");
}

Signal parse_csv_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) malformed("CSV_GRID: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("shape:", 0) != 0) malformed("CSV_GRID: first line must start with 'shape:'");
  std::vector<std::size_t> shape;
  std::size_t total = 1;
  {
    std::istringstream dims(line.substr(6));
    std::string tok;
    while (std::getline(dims, tok, ',')) {
      char* end = nullptr;
      errno = 0;
      const long long v = std::strtoll(tok.c_str(), &end, 10);
      if (tok.empty() || *end != '\0' || errno != 0 || v <= 0) malformed("CSV_GRID: bad dimension '" + tok + "'");
      shape.push_back(static_cast<std::size_t>(v));
      total *= shape.back();
    }
  }
  if (shape.empty()) malformed("CSV_GRID: shape has no dimensions");
  std::vector<double> values;
  values.reserve(total);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    while (*end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == line.c_str() || *end != '\0') {
      malformed("CSV_GRID: line " + std::to_string(line_no) + " is not a number");
    }
    if (!std::isfinite(v)) malformed("CSV_GRID: line " + std::to_string(line_no) + " is not finite");
    values.push_back(v);
  }
  if (values.size() < total) {
    throw FormatError(FormatErrorKind::kTruncatedPayload, "CSV_GRID: expected " + std::to_string(total) +
                                                              " values, found " + std::to_string(values.size()));
  }
  if (values.size() > total) {
    malformed("CSV_GRID: " + std::to_string(values.size()) + " values exceed the declared shape");
  }
  return Signal(std::move(shape), std::move(values));
}

Signal load_signal(const std::filesystem::path& path, SignalFormat format) {
  const auto bytes = read_file(path);
  try {
    switch (format) {
      case SignalFormat::kPgm:
        return parse_pgm(bytes);
      case SignalFormat::kWav:
        return parse_wav(bytes);
      case SignalFormat::kCsvGrid:
        return parse_csv_grid(std::string(bytes.begin(), bytes.end()));
    }
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
  throw UsageError("unknown signal format");
}

std::vector<std::uint8_t> encode_pgm(const Signal& signal) {
  if (signal.ndim() != 2) throw UsageError("PGM output needs a 2D signal");
  const std::string header =
      "P5\n" + std::to_string(signal.axis_sizes()[1]) + " " + std::to_string(signal.axis_sizes()[0]) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + signal.size());
  for (double v : signal.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5)));
  }
  return out;
}

void write_pgm(const Signal& signal, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(signal);
  write_file(path, bytes.data(), bytes.size());
}

void write_csv_grid(const Signal& signal, const std::filesystem::path& path) {
  std::string text = "shape:";
  for (std::size_t a = 0; a < signal.ndim(); ++a) {
    if (a) text += ',';
    text += std::to_string(signal.axis_sizes()[a]);
  }
  text += '\n';
  for (double v : signal.values()) {
    text += format_number(v);
    text += '\n';
  }
  write_file(path, text.data(), text.size());
}

std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text += ',';
    text += header[i];
  }
  text += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw UsageError("CSV row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += format_number(row[i]);
    }
    text += '\n';
  }
  return text;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  const std::string text = format_csv(header, rows);
  write_file(path, text.data(), text.size());
}

std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> samples, std::uint32_t sample_rate) {
  std::vector<std::uint8_t> out;
  const auto data_len = static_cast<std::uint32_t>(samples.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le32(out, 16);
  put_le16(out, 1);  // PCM
  put_le16(out, 1);  // mono
  put_le32(out, sample_rate);
  put_le32(out, sample_rate * 2);
  put_le16(out, 2);
  put_le16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le32(out, data_len);
  for (std::int16_t s : samples) put_le16(out, static_cast<std::uint16_t>(s));
  return out;
}

}  // namespace sinnet
