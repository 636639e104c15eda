#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace tkgr::io {

// Little-endian binary primitives shared by the TKGD/TKGM/TKGP containers.
// Readers throw ContainerError on truncation.

void write_u8(std::ostream& out, std::uint8_t v);
void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_i64(std::ostream& out, std::int64_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
void write_bytes(std::ostream& out, const void* data, std::size_t size);

/// u32 length prefix followed by raw UTF-8 bytes.
void write_string(std::ostream& out, const std::string& s);

std::uint8_t read_u8(std::istream& in);
std::uint16_t read_u16(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
std::int64_t read_i64(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);
void read_bytes(std::istream& in, void* data, std::size_t size);
std::string read_string(std::istream& in);

/// True when the stream is exactly at end of file.
bool at_eof(std::istream& in);

}  // namespace tkgr::io
