#include "kpath/binary_io.hpp"

#include <fstream>
#include <iterator>

namespace kpath {

std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open file: " + path);
    return std::vector<char>(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace kpath
