#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfmine {

/// Base class for every failure raised by the library. The CLI maps these
/// onto exit codes; callers that need finer control catch the subclasses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// history-model

class MalformedManifest : public Error {
public:
    using Error::Error;
};

class BrokenChain : public Error {
public:
    using Error::Error;
};

class DanglingRef : public Error {
public:
    using Error::Error;
};

class BranchingUnsupported : public Error {
public:
    using Error::Error;
};

class UnknownVersion : public Error {
public:
    explicit UnknownVersion(const std::string& version_id)
        : Error("unknown version '" + version_id + "'"), version_id_(version_id) {}
    const std::string& version_id() const noexcept { return version_id_; }

private:
    std::string version_id_;
};

class ReversedInterval : public Error {
public:
    using Error::Error;
};

// diff-engine

class DiffSyntax : public Error {
public:
    DiffSyntax(std::size_t line, const std::string& reason)
        : Error("diff syntax error at line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class HunkMismatch : public Error {
public:
    HunkMismatch(std::size_t line, const std::string& reason)
        : Error("hunk mismatch at line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class BinaryUnsupported : public Error {
public:
    using Error::Error;
};

class ContextMismatch : public Error {
public:
    ContextMismatch(const std::string& path, std::size_t line, const std::string& reason)
        : Error("context mismatch in " + path + " at line " + std::to_string(line) + ": " + reason),
          path_(path),
          line_(line) {}
    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

class MissingFile : public Error {
public:
    explicit MissingFile(const std::string& path) : Error("missing file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class UnknownPath : public Error {
public:
    explicit UnknownPath(const std::string& path)
        : Error("path not present in post-state: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class InvalidDiff : public Error {
public:
    using Error::Error;
};

// location-translator

class InvalidCoordinates : public Error {
public:
    using Error::Error;
};

class ChainMismatch : public Error {
public:
    using Error::Error;
};

// test-transplanter

class ExtractorFailure : public Error {
public:
    ExtractorFailure(const std::string& file, const std::string& reason)
        : Error("cannot extract units from " + file + ": " + reason), file_(file) {}
    const std::string& file() const noexcept { return file_; }

private:
    std::string file_;
};

class UnknownUnit : public Error {
public:
    explicit UnknownUnit(const std::string& unit_id) : Error("unknown test unit '" + unit_id + "'") {}
};

class CyclicDependency : public Error {
public:
    explicit CyclicDependency(std::vector<std::string> cycle);
    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    std::vector<std::string> cycle_;
};

class WorkspaceFailure : public Error {
public:
    using Error::Error;
};

// runner-harness

class HarnessFailure : public Error {
public:
    using Error::Error;
};

// coverage-tcm

class MalformedCoverage : public Error {
public:
    MalformedCoverage(const std::string& file, std::size_t line, const std::string& reason)
        : Error("malformed coverage in " + file + " line " + std::to_string(line) + ": " + reason) {}
};

class DuplicateTest : public Error {
public:
    explicit DuplicateTest(const std::string& test_id) : Error("duplicate test '" + test_id + "'") {}
};

class TcmSyntax : public Error {
public:
    TcmSyntax(std::size_t line, const std::string& reason)
        : Error("TCM syntax error at line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownElement : public Error {
public:
    UnknownElement(const std::string& bug_id, const std::string& name)
        : Error("bug '" + bug_id + "' tags unknown element '" + name + "'") {}
};

// cli-pipeline

class UnknownSelector : public Error {
public:
    explicit UnknownSelector(const std::string& selector)
        : Error("selector '" + selector + "' names no project, version or bug") {}
};

class ManifestMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace mfmine
