package com.acme.report;

import java.util.ArrayList;
import java.util.List;

public class ReportBuilder {

    private final List<String> lines = new ArrayList<>();

    public ReportBuilder title(String title) {
        lines.add("# " + title);
        return this;
    }

    public ReportBuilder row(String key, int value) {
        lines.add(key + ": " + value);
        return this;
    }

    public String build() {
        return String.join("\n", lines);
    }
}
