// Writes the synthetic toy corpus (versions, diffs, manifest, ground truth).

#include "corpus.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic multi-fault toy corpus", "mfmine_corpus"};
    std::filesystem::path out = "corpus/toy";
    bool force = false;
    app.add_option("out", out, "Output directory")->capture_default_str();
    app.add_flag("--force", force, "Replace an existing directory");
    CLI11_PARSE(app, argc, argv);

    try {
        if (std::filesystem::exists(out) && !std::filesystem::is_empty(out)) {
            if (!force) {
                std::cerr << out.string() << " is not empty (use --force to replace it)\n";
                return 1;
            }
            std::filesystem::remove_all(out);
        }
        const auto files = mfmine::corpus::generate_toy();
        mfmine::write_tree(out, files);
        std::cout << "wrote " << files.size() << " files to " << out.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
