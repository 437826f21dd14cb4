const cfgkit = require('cfgkit');

const text = cfgkit.load();
eval(text);
