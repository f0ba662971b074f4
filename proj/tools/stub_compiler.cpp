// Deterministic compiler stand-in for pipeline tests. Usage:
//   stub_compiler <src> [out]
// Rejects sources containing the token "= ;" with a syntax-style
// diagnostic; everything else is accepted and `out` (when given) is
// touched.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: stub_compiler <src> [out]\n");
        return 2;
    }
    std::ifstream in(argv[1], std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "stub_compiler: cannot open %s\n", argv[1]);
        return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string source = ss.str();

    if (source.find("= ;") != std::string::npos) {
        std::fprintf(stderr, "%s: error: expected expression before ';' token\n", argv[1]);
        return 1;
    }
    if (argc > 2) {
        std::ofstream out(argv[2], std::ios::binary | std::ios::trunc);
        out << "ok\n";
    }
    return 0;
}
