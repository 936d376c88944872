#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace texfuse {

/// Little-endian primitives shared by the binary file formats.
void write_u32(std::string& out, uint32_t v);
void write_u64(std::string& out, uint64_t v);
void write_f64(std::string& out, double v);
uint32_t read_u32(std::istream& in);
uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

/// FNV-1a over the canonical config dump; embedded in every artifact so a
/// result can be traced back to the exact configuration that produced it.
uint64_t fnv1a64(std::string_view data);
std::string hex64(uint64_t v);

/// Write-temp-then-rename so partially written artifacts are never observed.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// splitmix64; used to derive independent sub-seeds from one run seed.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace texfuse
