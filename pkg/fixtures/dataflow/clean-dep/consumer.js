const fs = require('fs');
const addkit = require('addkit');

const marked = addkit.add(fs.readFileSync('/etc/hostname'), '!');
console.log(marked);
